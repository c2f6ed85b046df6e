#pragma once

#include <span>
#include <string>
#include <vector>

#include "ibf/sampler.hpp"

namespace ibf {

struct Diagnostics {
    std::vector<std::string> parameter_names;
    std::vector<double> ess;
    std::vector<double> split_rhat;
    /// [chain][parameter]
    std::vector<std::vector<double>> chain_means;
    std::vector<std::vector<double>> chain_sds;

    double max_split_rhat() const;
    double min_ess() const;
};

/// Single-chain ESS from Geyer's initial positive sequence: autocorrelations
/// are summed in adjacent pairs until the first negative pair. Capped at the
/// chain length. A constant chain reports its length.
double effective_sample_size(std::span<const double> chain);

/// Sum of per-chain ESS values.
double pooled_effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Split-R-hat: the larger of the rank-normalized and the raw-value split
/// statistic over 2 * chains half-chains.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Requires at least 2 chains and 100 draws per chain.
Diagnostics diagnose(const DrawMatrix& draws);

}  // namespace ibf
