#include "ibf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "ibf/special.hpp"

namespace ibf {

namespace {

struct Accumulator {
    QuadratureResult total;

    void add(const QuadratureResult& r) {
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.converged = total.converged && r.converged;
        total.evaluations += r.evaluations;
    }
};

// Integral of f over [a, +inf) when f peaks near `peak` with width `scale`.
// Splitting at the peak keeps the atanh map from pushing the mass into the endpoint.
void add_upper_tail(Accumulator& acc, const Integrand& f, double a, double peak, double scale,
                    const QuadratureConfig& config) {
    if (peak > a) {
        acc.add(integrate_1d(f, Domain::interval(a, peak), config));
        acc.add(integrate_1d(f, Domain::above(peak, scale), config));
    } else {
        acc.add(integrate_1d(f, Domain::above(a, scale), config));
    }
}

void add_lower_tail(Accumulator& acc, const Integrand& f, double b, double peak, double scale,
                    const QuadratureConfig& config) {
    if (peak < b) {
        acc.add(integrate_1d(f, Domain::interval(peak, b), config));
        acc.add(integrate_1d(f, Domain::below(peak, scale), config));
    } else {
        acc.add(integrate_1d(f, Domain::below(b, scale), config));
    }
}

// Alternative region: both tails of the partition.
QuadratureResult integrate_alternative(const Integrand& f, const IntervalHypothesis& h, double peak,
                                       double scale, const QuadratureConfig& config) {
    Accumulator acc;
    add_lower_tail(acc, f, h.null_lower(), peak, scale, config);
    add_upper_tail(acc, f, h.null_upper(), peak, scale, config);
    return acc.total;
}

// The alternative prior is zero on the closed null interval, so its density
// jumps at +-delta. The tail integrals only ever touch that boundary as an
// endpoint, so use the untruncated shape there and keep the integrand smooth.
double alt_log_density_open(const MixturePrior& prior, double theta) {
    const auto& alt = prior.alt_prior();
    return math::normal_log_pdf(theta, prior.hypothesis().center(), alt.scale()) - alt.log_normalizer();
}

double relative(const QuadratureResult& r) {
    return r.value != 0.0 ? r.error_estimate / std::fabs(r.value) : r.error_estimate;
}

// Worst relative error among nested calls that carry non-negligible mass.
// Far-tail calls return values near zero with large relative error but add
// nothing to the outer integral.
class WorstRelative {
public:
    void record(const QuadratureResult& r) { seen_.emplace_back(std::fabs(r.value), relative(r)); }

    double value(double cutoff = 1e-6) const {
        double peak = 0.0;
        for (const auto& [v, rel] : seen_) peak = std::max(peak, v);
        double worst = 0.0;
        for (const auto& [v, rel] : seen_)
            if (v >= cutoff * peak) worst = std::max(worst, rel);
        return worst;
    }

private:
    std::vector<std::pair<double, double>> seen_;
};

}  // namespace

OracleResult make_oracle_result(double marginal_null, double null_error, double marginal_alt,
                                double alt_error, double eta1) {
    OracleResult r;
    r.marginal_null = marginal_null;
    r.marginal_alt = marginal_alt;
    r.bf10_exact = marginal_alt / marginal_null;
    r.p_alt_exact = eta1 * marginal_alt / ((1.0 - eta1) * marginal_null + eta1 * marginal_alt);
    r.error_estimate = r.bf10_exact * (null_error / std::fabs(marginal_null) + alt_error / std::fabs(marginal_alt));
    return r;
}

OracleResult toy_model_oracle(double y_obs, const IntervalHypothesis& h, double tau, double eta1,
                              const QuadratureConfig& config, double likelihood_variance) {
    const MixturePrior prior(h, tau, eta1);
    // The likelihood's normalizing constant is applied after integration so
    // that the integrands stay O(1) and abs_tol keeps its meaning for any
    // likelihood variance.
    const double log_lik_norm = -math::log_sqrt_2pi - 0.5 * std::log(likelihood_variance);
    const auto log_kernel = [&](double theta) {
        return -0.5 * (y_obs - theta) * (y_obs - theta) / likelihood_variance;
    };

    const Integrand null_integrand = [&](double theta) {
        return std::exp(log_kernel(theta)) * prior.null_prior().height();
    };
    const Integrand alt_integrand = [&](double theta) {
        return std::exp(log_kernel(theta) + alt_log_density_open(prior, theta));
    };

    const auto f0 = integrate_1d(null_integrand, Domain::interval(h.null_lower(), h.null_upper()), config);
    // The posterior under pi1 alone peaks between the prior center and y.
    const double post_var = 1.0 / (1.0 / likelihood_variance + 1.0 / (tau * tau));
    const double peak = post_var * (y_obs / likelihood_variance + h.center() / (tau * tau));
    const auto f1 = integrate_alternative(alt_integrand, h, peak, std::sqrt(post_var), config);

    const double c = std::exp(log_lik_norm);
    auto r = make_oracle_result(c * f0.value, c * f0.error_estimate, c * f1.value, c * f1.error_estimate, eta1);
    r.converged = f0.converged && f1.converged;
    r.evaluations = f0.evaluations + f1.evaluations;
    return r;
}

OracleResult two_sample_oracle(const TwoSampleData& data, const TwoSampleEffectModelConfig& cfg,
                               const QuadratureConfig& config) {
    data.validate();
    cfg.validate();
    config.validate();

    const auto& xs = data.group_x;
    const auto& ys = data.group_y;
    const double m = static_cast<double>(xs.size());
    const double n = static_cast<double>(ys.size());
    double x_bar = 0.0, y_bar = 0.0;
    for (double v : xs) x_bar += v;
    for (double v : ys) y_bar += v;
    x_bar /= m;
    y_bar /= n;

    const IntervalHypothesis h = cfg.hypothesis();
    const MixturePrior prior = cfg.prior();

    // Log of likelihood times the mu and sigma2 priors, with the Jacobian of
    // sigma2 = exp(v). Sums of squares are expanded around each group mean.
    double sxx = 0.0, syy = 0.0;
    for (double v : xs) sxx += (v - x_bar) * (v - x_bar);
    for (double v : ys) syy += (v - y_bar) * (v - y_bar);
    const double log_mu_norm = -math::log_sqrt_2pi - std::log(cfg.prior_mu_sd);
    const double ig_const = cfg.sigma2_ig_shape * std::log(cfg.sigma2_ig_rate) - std::lgamma(cfg.sigma2_ig_shape);
    const auto log_joint = [&](double v, double mu, double theta) {
        const double sigma2 = std::exp(v);
        const double mu_y = mu + theta * std::exp(0.5 * v);
        const double sq = sxx + m * (x_bar - mu) * (x_bar - mu) + syy + n * (y_bar - mu_y) * (y_bar - mu_y);
        const double lik = -(m + n) * (math::log_sqrt_2pi + 0.5 * v) - 0.5 * sq / sigma2;
        const double mu_prior = log_mu_norm - 0.5 * (mu / cfg.prior_mu_sd) * (mu / cfg.prior_mu_sd);
        const double ig_prior = ig_const - (cfg.sigma2_ig_shape + 1.0) * v - cfg.sigma2_ig_rate / sigma2;
        return lik + mu_prior + ig_prior + v;
    };
    const double pooled = std::max((sxx + syy) / std::max(1.0, m + n - 2.0), 1e-12);
    const double v_hat = std::log(pooled);
    const double offset = log_joint(v_hat, x_bar, (y_bar - x_bar) / std::sqrt(pooled));

    const QuadratureConfig inner_cfg = config.tightened(0.1);
    const QuadratureConfig& middle_cfg = config;

    const auto marginal = [&](bool alternative) {
        WorstRelative worst_inner;
        WorstRelative worst_middle;
        bool converged = true;
        long evaluations = 0;

        const auto theta_integral = [&](double v, double mu) {
            const Integrand f = [&](double theta) {
                const double lp = log_joint(v, mu, theta) - offset;
                return std::exp(lp + (alternative ? alt_log_density_open(prior, theta)
                                                  : prior.null_prior().log_density(theta)));
            };
            QuadratureResult r;
            if (alternative) {
                const double peak = (y_bar - mu) / std::exp(0.5 * v);
                r = integrate_alternative(f, h, peak, 1.0 / std::sqrt(n), inner_cfg);
            } else {
                r = integrate_1d(f, Domain::interval(h.null_lower(), h.null_upper()), inner_cfg);
            }
            worst_inner.record(r);
            converged = converged && r.converged;
            evaluations += r.evaluations;
            return r.value;
        };
        const auto mu_integral = [&](double v) {
            const double sigma = std::exp(0.5 * v);
            const Integrand f = [&](double mu) { return theta_integral(v, mu); };
            const auto r = integrate_1d(f, Domain::line(x_bar, 1.5 * sigma / std::sqrt(m)), middle_cfg);
            worst_middle.record(r);
            converged = converged && r.converged;
            return r.value;
        };
        const auto outer = integrate_1d(mu_integral, Domain::line(v_hat, 1.0), config);
        QuadratureResult total = outer;
        total.converged = converged && outer.converged;
        total.evaluations = evaluations;
        total.error_estimate = std::fabs(outer.value) * (relative(outer) + worst_middle.value() + worst_inner.value());
        return total;
    };

    const auto f0 = marginal(false);
    const auto f1 = marginal(true);
    auto r = make_oracle_result(f0.value, f0.error_estimate, f1.value, f1.error_estimate, cfg.eta1);
    r.converged = f0.converged && f1.converged;
    r.evaluations = f0.evaluations + f1.evaluations;
    return r;
}

}  // namespace ibf
