#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibf/rng.hpp"

namespace ibf {

/// Support of one model parameter in constrained space.
struct Support {
    enum class Kind { Unbounded, Positive, Interval };

    Kind kind = Kind::Unbounded;
    double lower = 0.0;
    double upper = 0.0;

    static Support unbounded() { return {Kind::Unbounded, 0.0, 0.0}; }
    static Support positive() { return {Kind::Positive, 0.0, 0.0}; }
    static Support interval(double lower, double upper);

    /// Strict interior membership.
    bool contains(double x) const;
};

/// Constrained -> unconstrained: identity, log, or scaled logit.
double transform_to_unconstrained(double value, const Support& support);
double transform_to_constrained(double z, const Support& support);
/// log |dx/dz| evaluated at unconstrained z.
double log_jacobian(double z, const Support& support);

using LogDensity = std::function<double(std::span<const double>)>;
using Initializer = std::function<std::vector<double>(Rng&)>;

/// An unnormalized log posterior over named parameters in constrained space.
/// `log_posterior` must be callable concurrently from several threads.
struct ModelSpec {
    std::vector<std::string> parameter_names;
    std::vector<Support> supports;
    LogDensity log_posterior;
    /// Optional starting-point generator. Without one, each parameter starts
    /// at uniform(-2, 2) in unconstrained space.
    Initializer initializer;

    std::size_t dimension() const { return parameter_names.size(); }
    std::size_t index_of(const std::string& name) const;
    void validate() const;
};

struct SamplerConfig {
    int chains = 4;
    int warmup_iterations = 10000;
    int sampling_iterations = 20000;
    std::uint64_t seed = 1;
    double target_acceptance = 0.44;
    double initial_step_scale = 0.1;
    /// Upper bound on concurrently running chains; 0 uses the hardware count.
    int threads = 0;

    void validate() const;
};

/// Post-warmup draws, stored [chain][iteration][parameter].
class DrawMatrix {
public:
    DrawMatrix() = default;
    DrawMatrix(std::vector<std::string> names, int chains, int iterations, std::uint64_t seed);

    int chains() const { return chains_; }
    int iterations() const { return iterations_; }
    std::size_t parameters() const { return names_.size(); }
    const std::vector<std::string>& parameter_names() const { return names_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t index_of(const std::string& name) const;

    double& at(int chain, int iteration, std::size_t parameter);
    double at(int chain, int iteration, std::size_t parameter) const;

    /// One parameter's draws for one chain.
    std::vector<double> chain_column(int chain, std::size_t parameter) const;
    /// One parameter's draws, one vector per chain.
    std::vector<std::vector<double>> by_chain(std::size_t parameter) const;
    /// One parameter's draws concatenated in chain order.
    std::vector<double> pooled(std::size_t parameter) const;

    /// Acceptance rate during sampling, [chain][parameter].
    std::vector<std::vector<double>> acceptance_rates;
    /// Proposal scales frozen at the end of warmup and read back after
    /// sampling, [chain][parameter]. The two snapshots must agree.
    std::vector<std::vector<double>> step_scales_at_freeze;
    std::vector<std::vector<double>> step_scales_at_end;

private:
    std::vector<std::string> names_;
    int chains_ = 0;
    int iterations_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<double> values_;
};

/// Component-wise adaptive random-walk Metropolis in unconstrained space.
/// Chain k uses Rng::stream(config.seed, k); the result depends only on
/// (model, config, init), not on thread scheduling.
DrawMatrix run_chains(const ModelSpec& model, const SamplerConfig& config,
                      const std::optional<std::vector<double>>& init = std::nullopt);

/// CSV with header `chain,iteration,<names...>`; chain and iteration are 1-based.
void write_draws_csv(std::ostream& out, const DrawMatrix& draws);

}  // namespace ibf
