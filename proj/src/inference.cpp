#include "ibf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibf/diagnostics.hpp"
#include "ibf/errors.hpp"
#include "ibf/special.hpp"

namespace ibf {

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
}
}  // namespace

std::string_view to_string(Degeneracy d) {
    switch (d) {
        case Degeneracy::None: return "none";
        case Degeneracy::NoAlternativeDraws: return "no_alternative_draws";
        case Degeneracy::NoNullDraws: return "no_null_draws";
    }
    return "none";
}

std::string_view to_string(RopeVerdict v) {
    switch (v) {
        case RopeVerdict::AcceptNull: return "AcceptNull";
        case RopeVerdict::RejectNull: return "RejectNull";
        case RopeVerdict::Undecided: return "Undecided";
    }
    return "Undecided";
}

std::string_view to_string(RefinedVerdict v) {
    switch (v) {
        case RefinedVerdict::DeclareH0: return "DeclareH0";
        case RefinedVerdict::DeclareH1: return "DeclareH1";
        case RefinedVerdict::NoDeclaration: return "NoDeclaration";
    }
    return "NoDeclaration";
}

PosteriorMass posterior_mass(const std::vector<std::vector<double>>& chains,
                             const IntervalHypothesis& h) {
    PosteriorMass m;
    std::vector<std::vector<double>> indicators;
    indicators.reserve(chains.size());
    for (const auto& chain : chains) {
        auto& ind = indicators.emplace_back(chain.size());
        for (std::size_t i = 0; i < chain.size(); ++i) {
            ind[i] = h.in_null(chain[i]) ? 0.0 : 1.0;
            m.alt_count += static_cast<long>(ind[i]);
        }
        m.n_draws += static_cast<long>(chain.size());
    }
    if (m.n_draws == 0) throw InputError("posterior_mass: no draws");
    m.p_alt = static_cast<double>(m.alt_count) / static_cast<double>(m.n_draws);
    m.n_effective = pooled_effective_sample_size(indicators);
    m.standard_error = std::sqrt(m.p_alt * (1.0 - m.p_alt) / m.n_effective);
    return m;
}

PosteriorMass posterior_mass(std::span<const double> draws, const IntervalHypothesis& h) {
    return posterior_mass(std::vector<std::vector<double>>{{draws.begin(), draws.end()}}, h);
}

double BayesFactorEstimate::standard_error() const {
    if (degenerate()) return nan;
    return bf10 * math::ln10 * mc_standard_error_log10;
}

BayesFactorEstimate bayes_factor(const PosteriorMass& mass, double eta1) {
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw InputError("bayes_factor: eta1 must lie in (0, 1)");
    if (!(mass.n_draws > 0)) throw InputError("bayes_factor: posterior mass has no draws");

    BayesFactorEstimate bf;
    bf.eta1_used = eta1;
    const double prior_ratio = (1.0 - eta1) / eta1;
    const double p = mass.p_alt;

    if (mass.alt_count == 0 || mass.alt_count == mass.n_draws) {
        const double unseen = 3.0 / static_cast<double>(mass.n_draws);
        const double bound_odds = unseen < 1.0 ? unseen / (1.0 - unseen) : inf;
        bf.mc_standard_error_log10 = nan;
        if (mass.alt_count == 0) {
            bf.degeneracy = Degeneracy::NoAlternativeDraws;
            bf.bf10 = 0.0;
            bf.log10_bf10 = -inf;
            bf.bound = prior_ratio * bound_odds;
        } else {
            bf.degeneracy = Degeneracy::NoNullDraws;
            bf.bf10 = inf;
            bf.log10_bf10 = inf;
            bf.bound = unseen < 1.0 ? prior_ratio / bound_odds : 0.0;
        }
        return bf;
    }

    bf.bf10 = prior_ratio * p / (1.0 - p);
    bf.log10_bf10 = std::log10(bf.bf10);
    bf.mc_standard_error_log10 = mass.standard_error / (p * (1.0 - p) * math::ln10);
    return bf;
}

bool looks_multimodal(std::span<const double> sorted, int bins) {
    if (sorted.size() < 50 || bins < 3) return false;
    const double lo = sorted.front();
    const double hi = sorted.back();
    if (!(hi > lo)) return false;
    std::vector<double> counts(bins, 0.0);
    for (double v : sorted) {
        int b = static_cast<int>((v - lo) / (hi - lo) * bins);
        counts[std::min(b, bins - 1)] += 1.0;
    }
    const double min_peak = 0.02 * static_cast<double>(sorted.size());

    // Walk the histogram; a new peak counts only after a valley at most half
    // the height of both neighbouring peaks.
    int peaks = 0;
    double last_peak = 0.0;
    double valley = inf;
    for (int b = 0; b < bins; ++b) {
        const double c = counts[b];
        const bool is_local_max = (b == 0 || c >= counts[b - 1]) && (b == bins - 1 || c > counts[b + 1]);
        if (peaks > 0) valley = std::min(valley, c);
        if (is_local_max && c >= min_peak) {
            if (peaks == 0) {
                peaks = 1;
                last_peak = c;
                valley = inf;
            } else if (valley <= 0.5 * std::min(last_peak, c)) {
                ++peaks;
                last_peak = c;
                valley = inf;
            } else {
                last_peak = std::max(last_peak, c);
            }
        }
    }
    return peaks > 1;
}

HdiInterval hdi(std::span<const double> draws, double alpha) {
    check_alpha(alpha);
    const std::size_t n = draws.size();
    if (n < 2) throw InputError("hdi: at least two draws required");

    std::vector<double> sorted(draws.begin(), draws.end());
    for (double v : sorted)
        if (!std::isfinite(v)) throw InputError("hdi: draws must be finite");
    std::sort(sorted.begin(), sorted.end());

    const double target = (1.0 - alpha) * static_cast<double>(n);
    // Guard against (1 - alpha) * n landing a rounding error above an integer.
    std::size_t k = static_cast<std::size_t>(std::ceil(target - 1e-9 * std::max(1.0, target)));
    k = std::clamp<std::size_t>(k, 1, n);

    std::size_t best = 0;
    double best_width = sorted[k - 1] - sorted[0];
    for (std::size_t i = 1; i + k <= n; ++i) {
        const double width = sorted[i + k - 1] - sorted[i];
        if (width < best_width) {
            best_width = width;
            best = i;
        }
    }
    HdiInterval out;
    out.lower = sorted[best];
    out.upper = sorted[best + k - 1];
    out.nominal_level = 1.0 - alpha;
    out.contained_count = static_cast<long>(k);
    out.multimodal = looks_multimodal(sorted);
    return out;
}

RopeDecision rope_decide(const HdiInterval& interval, const PosteriorMass& mass,
                         const IntervalHypothesis& h, double alpha) {
    check_alpha(alpha);
    RopeDecision d;
    d.hdi = interval;
    d.alpha = alpha;
    d.p_alt = mass.p_alt;
    d.p_null = mass.p_null();

    if (interval.lower >= h.null_lower() && interval.upper <= h.null_upper())
        d.verdict = RopeVerdict::AcceptNull;
    else if (interval.upper < h.null_lower() || interval.lower > h.null_upper())
        d.verdict = RopeVerdict::RejectNull;
    else
        d.verdict = RopeVerdict::Undecided;

    if (d.p_null > 1.0 - alpha)
        d.refined_verdict = RefinedVerdict::DeclareH0;
    else if (d.p_alt > 1.0 - alpha)
        d.refined_verdict = RefinedVerdict::DeclareH1;
    else
        d.refined_verdict = RefinedVerdict::NoDeclaration;
    return d;
}

RopeDecision rope_decide(std::span<const double> draws, const IntervalHypothesis& h,
                         double alpha) {
    const auto interval = hdi(draws, alpha);
    return rope_decide(interval, posterior_mass(draws, h), h, alpha);
}

double continuity_eta1(const IntervalHypothesis& h, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("continuity_eta1: tau must be positive");
    const double delta = h.half_width();
    const double z = delta / tau;
    const double log_u0 = -std::log(2.0 * delta);
    const double log_u1 = math::normal_log_pdf(z) - std::log(tau) - std::log(2.0) - math::normal_log_sf(z);
    return 1.0 / (1.0 + std::exp(log_u1 - log_u0));
}

InferenceReport full_report(const std::vector<std::vector<double>>& chains,
                            const IntervalHypothesis& h, double eta1, double alpha) {
    check_alpha(alpha);
    InferenceReport r{h, alpha, {}, {}, {}, {}};
    r.mass = posterior_mass(chains, h);
    r.bayes_factor = bayes_factor(r.mass, eta1);
    std::vector<double> pooled;
    for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
    r.hdi = hdi(pooled, alpha);
    r.decision = rope_decide(r.hdi, r.mass, h, alpha);
    return r;
}

}  // namespace ibf
