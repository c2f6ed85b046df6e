#pragma once

#include "ibf/hypothesis.hpp"
#include "ibf/models.hpp"
#include "ibf/quadrature.hpp"

namespace ibf {

/// Marginal likelihoods under each hypothesis by deterministic quadrature.
/// Both marginals may share an arbitrary common scale factor; only their
/// ratio is meaningful.
struct OracleResult {
    double marginal_null = 0.0;
    double marginal_alt = 0.0;
    double bf10_exact = 0.0;
    double p_alt_exact = 0.0;
    /// Propagated absolute error of bf10_exact.
    double error_estimate = 0.0;
    bool converged = true;
    long evaluations = 0;
};

/// Assembles bf10 = f1 / f0 and p_alt = eta1 f1 / ((1 - eta1) f0 + eta1 f1).
OracleResult make_oracle_result(double marginal_null, double null_error, double marginal_alt,
                                double alt_error, double eta1);

/// y ~ N(theta, likelihood_variance), theta ~ (1 - eta1) pi0 + eta1 pi1.
OracleResult toy_model_oracle(double y_obs, const IntervalHypothesis& h, double tau, double eta1,
                              const QuadratureConfig& config = {}, double likelihood_variance = 1.0);

/// Nested quadrature over (log sigma2, mu_x, theta), theta innermost and split
/// at the null boundary. The innermost level runs at a tenth of the given
/// tolerances. Meant for validation runs. With rel_tol near 1e-6 a call takes
/// well under a second; at the 1e-8 default the inner integrals' own error acts
/// as noise for the middle level, and a few tail calls may hit max_depth
/// (reported through `converged`) while bf10_exact is still stable to ~1e-9.
OracleResult two_sample_oracle(const TwoSampleData& data, const TwoSampleEffectModelConfig& cfg,
                               const QuadratureConfig& config = {});

}  // namespace ibf
