#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ibf/hypothesis.hpp"

namespace ibf {

/// Estimate of Pr(theta ~ pi1 | y) as the fraction of draws in the alternative region.
struct PosteriorMass {
    double p_alt = 0.0;
    double standard_error = 0.0;
    /// ESS of the 0/1 region-indicator series.
    double n_effective = 0.0;
    long n_draws = 0;
    long alt_count = 0;

    double p_null() const { return 1.0 - p_alt; }
};

/// Draws pooled across chains; the indicator ESS is the sum of per-chain ESS.
PosteriorMass posterior_mass(const std::vector<std::vector<double>>& chains,
                             const IntervalHypothesis& h);
/// A single draw sequence, treated as one chain.
PosteriorMass posterior_mass(std::span<const double> draws, const IntervalHypothesis& h);

enum class Degeneracy {
    None,
    /// No draw fell in the alternative region; bf10 is 0 and `bound` is an upper bound.
    NoAlternativeDraws,
    /// Every draw fell in the alternative region; bf10 is +inf and `bound` is a lower bound.
    NoNullDraws,
};

std::string_view to_string(Degeneracy d);

struct BayesFactorEstimate {
    /// ((1 - eta1) / eta1) * p / (1 - p), evaluated exactly from the stored p.
    double bf10 = 0.0;
    double log10_bf10 = 0.0;
    /// Delta-method Monte Carlo SE of log10(bf10).
    double mc_standard_error_log10 = 0.0;
    double eta1_used = 0.5;
    Degeneracy degeneracy = Degeneracy::None;
    /// One-sided bound for degenerate estimates from the rule of three (3 / N).
    double bound = 0.0;

    bool degenerate() const { return degeneracy != Degeneracy::None; }
    /// Delta-method SE of bf10 on the linear scale.
    double standard_error() const;
};

BayesFactorEstimate bayes_factor(const PosteriorMass& mass, double eta1);

struct HdiInterval {
    double lower = 0.0;
    double upper = 0.0;
    double nominal_level = 0.95;
    long contained_count = 0;
    /// Coarse histogram of the draws shows more than one mode, so the
    /// shortest single interval may be misleading.
    bool multimodal = false;
};

/// Shortest window of ceil((1 - alpha) N) consecutive order statistics; ties
/// go to the smallest lower endpoint.
HdiInterval hdi(std::span<const double> draws, double alpha = 0.05);

/// True when a histogram with `bins` equal bins has more than one well
/// separated peak.
bool looks_multimodal(std::span<const double> sorted_draws, int bins = 20);

enum class RopeVerdict { AcceptNull, RejectNull, Undecided };
enum class RefinedVerdict { DeclareH0, DeclareH1, NoDeclaration };

std::string_view to_string(RopeVerdict v);
std::string_view to_string(RefinedVerdict v);

struct RopeDecision {
    RopeVerdict verdict = RopeVerdict::Undecided;
    RefinedVerdict refined_verdict = RefinedVerdict::NoDeclaration;
    double p_null = 0.0;
    double p_alt = 0.0;
    HdiInterval hdi;
    double alpha = 0.05;
};

/// HDI-vs-null-region rule, plus the posterior-mass rule
/// (declare Hj when Pr(theta in region j | y) > 1 - alpha).
RopeDecision rope_decide(const HdiInterval& interval, const PosteriorMass& mass,
                         const IntervalHypothesis& h, double alpha);
RopeDecision rope_decide(std::span<const double> draws, const IntervalHypothesis& h,
                         double alpha = 0.05);

/// eta1 making the mixture prior continuous at the null boundary:
/// (1 - eta1) / (2 delta) = eta1 * pi1(delta+).
double continuity_eta1(const IntervalHypothesis& h, double tau);

struct InferenceReport {
    IntervalHypothesis hypothesis{0.0, 1.0};
    double alpha = 0.05;
    PosteriorMass mass;
    BayesFactorEstimate bayes_factor;
    HdiInterval hdi;
    RopeDecision decision;
};

InferenceReport full_report(const std::vector<std::vector<double>>& chains,
                            const IntervalHypothesis& h, double eta1, double alpha = 0.05);

}  // namespace ibf
