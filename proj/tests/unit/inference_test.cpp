#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibf/diagnostics.hpp"
#include "ibf/errors.hpp"
#include "ibf/inference.hpp"
#include "ibf/rng.hpp"

using namespace ibf;

namespace {

double phi_ref(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double pdf_ref(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846); }

// Every window of k consecutive order statistics, shortest first, then lowest start.
std::pair<double, double> brute_force_hdi(std::vector<double> v, double alpha) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::size_t k = static_cast<std::size_t>(std::ceil((1 - alpha) * n - 1e-9 * std::max(1.0, (1 - alpha) * n)));
    k = std::clamp<std::size_t>(k, 1, n);
    double best_w = std::numeric_limits<double>::infinity();
    std::pair<double, double> best{0, 0};
    for (std::size_t i = 0; i + k <= n; ++i) {
        const double w = v[i + k - 1] - v[i];
        if (w < best_w) {
            best_w = w;
            best = {v[i], v[i + k - 1]};
        }
    }
    return best;
}

// Mixed shapes, some rounded so that ties occur.
std::vector<double> random_draw_set(Rng& r, int trial) {
    const int n = 2 + static_cast<int>(r.uniform() * 1999);
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        switch (trial % 5) {
            case 0: v[i] = r.normal(); break;
            case 1: v[i] = -std::log(r.uniform_open()); break;
            case 2: v[i] = r.uniform() < 0.4 ? r.normal(-3, 0.5) : r.normal(2, 1); break;
            case 3: v[i] = std::round(r.normal(0, 3)); break;
            default: v[i] = std::round(10 * r.uniform()) / 10; break;
        }
    }
    return v;
}

std::vector<double> uniform_draws(Rng& r, int n, double lo, double hi) {
    std::vector<double> v(n);
    for (auto& x : v) x = r.uniform(lo, hi);
    return v;
}

}  // namespace

TEST_CASE("posterior mass is the exact fraction of alternative draws") {
    const std::vector<double> d{-0.05, 0.0, 0.05, 0.2};
    const auto m = posterior_mass(std::span<const double>(d), IntervalHypothesis(0, 0.1));
    CHECK(m.p_alt == 0.25);
    CHECK(m.alt_count == 1);
    CHECK(m.n_draws == 4);
    CHECK(m.p_null() == 0.75);
}

TEST_CASE("posterior mass standard error uses the indicator ESS") {
    Rng r(2);
    std::vector<std::vector<double>> chains(3);
    for (auto& c : chains)
        for (int i = 0; i < 3000; ++i) c.push_back(r.normal(0.1, 0.2));
    const IntervalHypothesis h(0, 0.1);
    const auto m = posterior_mass(chains, h);
    std::vector<std::vector<double>> indicators;
    long count = 0;
    for (const auto& c : chains) {
        indicators.emplace_back();
        for (double x : c) {
            const double ind = h.in_null(x) ? 0.0 : 1.0;
            indicators.back().push_back(ind);
            count += static_cast<long>(ind);
        }
    }
    CHECK(m.p_alt == static_cast<double>(count) / 9000.0);
    CHECK(m.n_effective == doctest::Approx(pooled_effective_sample_size(indicators)).epsilon(1e-12));
    CHECK(m.standard_error == doctest::Approx(std::sqrt(m.p_alt * (1 - m.p_alt) / m.n_effective)).epsilon(1e-12));
}

TEST_CASE("posterior mass rejects empty input") {
    CHECK_THROWS_AS(posterior_mass(std::span<const double>(), IntervalHypothesis(0, 1)), InputError);
    CHECK_THROWS_AS(posterior_mass(std::vector<std::vector<double>>{}, IntervalHypothesis(0, 1)), InputError);
}

TEST_CASE("all draws in the null region give a zero Bayes factor with a bound") {
    const std::vector<double> d(1000, 0.01);
    const auto m = posterior_mass(std::span<const double>(d), IntervalHypothesis(0, 0.1));
    CHECK(m.p_alt == 0.0);
    const auto bf = bayes_factor(m, 0.5);
    CHECK(bf.bf10 == 0.0);
    CHECK(bf.degeneracy == Degeneracy::NoAlternativeDraws);
    CHECK(bf.bound == doctest::Approx(0.003 / 0.997));
    CHECK(to_string(bf.degeneracy) == "no_alternative_draws");
}

TEST_CASE("all draws in the alternative give an infinite Bayes factor with a lower bound") {
    const std::vector<double> d(300, 5.0);
    const auto bf = bayes_factor(posterior_mass(std::span<const double>(d), IntervalHypothesis(0, 0.1)), 0.25);
    CHECK(bf.degeneracy == Degeneracy::NoNullDraws);
    CHECK(std::isinf(bf.bf10));
    CHECK(bf.bound == doctest::Approx(3.0 * 0.99 / 0.01));
}

TEST_CASE("Bayes factor point values") {
    PosteriorMass m;
    m.n_draws = 10000;
    m.standard_error = 0.004;
    m.p_alt = 0.5;
    m.alt_count = 5000;
    CHECK(bayes_factor(m, 0.5).bf10 == 1.0);
    m.p_alt = 0.9727;
    m.alt_count = 9727;
    CHECK(bayes_factor(m, 0.5).bf10 == doctest::Approx(0.9727 / 0.0273).epsilon(1e-14));
    CHECK(bayes_factor(m, 0.5).bf10 == doctest::Approx(35.66).epsilon(1e-3));
    m.p_alt = 0.29;
    m.alt_count = 2900;
    CHECK(bayes_factor(m, 0.5).bf10 == doctest::Approx(0.4085).epsilon(1e-3));
    CHECK(bayes_factor(m, 0.5).bf10 == doctest::Approx(0.411).epsilon(0.01));
}

TEST_CASE("log10 standard error by the delta method") {
    PosteriorMass m;
    m.p_alt = 0.8;
    m.alt_count = 800;
    m.n_draws = 1000;
    m.standard_error = 0.02;
    const auto bf = bayes_factor(m, 0.3);
    CHECK(bf.log10_bf10 == doctest::Approx(std::log10(bf.bf10)));
    CHECK(bf.mc_standard_error_log10 == doctest::Approx(0.02 / (0.8 * 0.2 * std::log(10.0))));
    CHECK(bf.standard_error() == doctest::Approx(bf.bf10 * std::log(10.0) * bf.mc_standard_error_log10));
    CHECK(bf.eta1_used == 0.3);
}

TEST_CASE("Bayes factor identity holds for every eta1") {
    Rng r(3);
    for (int i = 0; i < 2000; ++i) {
        PosteriorMass m;
        m.n_draws = 1 + static_cast<long>(r.uniform() * 100000);
        m.alt_count = 1 + static_cast<long>(r.uniform() * (m.n_draws - 1));
        if (m.alt_count >= m.n_draws) continue;
        m.p_alt = static_cast<double>(m.alt_count) / m.n_draws;
        const double eta1 = r.uniform(0.001, 0.999);
        const auto bf = bayes_factor(m, eta1);
        CHECK(bf.bf10 * (eta1 / (1 - eta1)) == doctest::Approx(m.p_alt / (1 - m.p_alt)).epsilon(1e-13));
    }
}

TEST_CASE("eta1 outside (0, 1) is rejected") {
    PosteriorMass m;
    m.p_alt = 0.5;
    m.alt_count = 1;
    m.n_draws = 2;
    CHECK_THROWS_AS(bayes_factor(m, 0.0), InputError);
    CHECK_THROWS_AS(bayes_factor(m, 1.0), InputError);
    CHECK_THROWS_AS(bayes_factor(m, NAN), InputError);
}

TEST_CASE("HDI of evenly spaced draws takes the lowest window") {
    std::vector<double> d;
    for (int i = 1; i <= 100; ++i) d.push_back(i);
    const auto h = hdi(d, 0.05);
    CHECK(h.lower == 1);
    CHECK(h.upper == 95);
    CHECK(h.contained_count == 95);
    CHECK(h.nominal_level == doctest::Approx(0.95));
}

TEST_CASE("HDI of a point mass") {
    const std::vector<double> d(50, 3.25);
    const auto h = hdi(d, 0.05);
    CHECK(h.lower == 3.25);
    CHECK(h.upper == 3.25);
}

TEST_CASE("HDI of standard normal draws") {
    Rng r(4);
    std::vector<double> d(100000);
    for (auto& x : d) x = r.normal();
    const auto h = hdi(d, 0.05);
    CHECK(std::fabs(h.lower + 1.96) <= 0.05);
    CHECK(std::fabs(h.upper - 1.96) <= 0.05);
    CHECK_FALSE(h.multimodal);
}

TEST_CASE("HDI equals brute-force enumeration") {
    Rng r(5);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_draw_set(r, trial);
        const double alpha = trial % 3 == 0 ? 0.05 : (trial % 3 == 1 ? 0.1 : 0.32);
        const auto h = hdi(d, alpha);
        const auto bf = brute_force_hdi(d, alpha);
        CHECK(h.lower == bf.first);
        CHECK(h.upper == bf.second);
        CHECK(h.contained_count >= static_cast<long>(std::ceil((1 - alpha) * d.size() - 1e-9 * d.size())));
    }
}

TEST_CASE("HDI input validation") {
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(hdi(one, 0.05), InputError);
    CHECK_THROWS_AS(hdi(two, 0.0), InputError);
    CHECK_THROWS_AS(hdi(two, 1.0), InputError);
    const std::vector<double> bad{1.0, NAN, 2.0};
    CHECK_THROWS_AS(hdi(bad, 0.05), InputError);
}

TEST_CASE("two separated clusters are flagged as multimodal") {
    Rng r(6);
    std::vector<double> d;
    for (int i = 0; i < 2000; ++i) d.push_back(i % 2 ? r.normal(-4, 0.5) : r.normal(4, 0.5));
    CHECK(hdi(d, 0.05).multimodal);
}

TEST_CASE("ROPE: draws inside the null region") {
    Rng r(7);
    const auto d = uniform_draws(r, 1000, -0.01, 0.01);
    const auto dec = rope_decide(d, IntervalHypothesis(0, 0.1), 0.05);
    CHECK(dec.verdict == RopeVerdict::AcceptNull);
    CHECK(dec.refined_verdict == RefinedVerdict::DeclareH0);
    CHECK(dec.p_null == 1.0);
}

TEST_CASE("ROPE: draws outside the null region") {
    Rng r(8);
    const auto d = uniform_draws(r, 1000, 0.5, 0.6);
    const auto dec = rope_decide(d, IntervalHypothesis(0, 0.1), 0.05);
    CHECK(dec.verdict == RopeVerdict::RejectNull);
    CHECK(dec.refined_verdict == RefinedVerdict::DeclareH1);
    CHECK(dec.p_alt == 1.0);
}

TEST_CASE("ROPE: mass split between the regions") {
    Rng r(9);
    auto d = uniform_draws(r, 2000, 0.0, 0.05);
    const auto far = uniform_draws(r, 2000, 0.5, 0.55);
    d.insert(d.end(), far.begin(), far.end());
    const auto dec = rope_decide(d, IntervalHypothesis(0, 0.1), 0.05);
    CHECK(dec.verdict == RopeVerdict::Undecided);
    CHECK(dec.refined_verdict == RefinedVerdict::NoDeclaration);
    CHECK(dec.p_null == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(to_string(dec.verdict) == "Undecided");
    CHECK(to_string(dec.refined_verdict) == "NoDeclaration");
}

TEST_CASE("HDI containment implies region mass (coherence)") {
    Rng r(10);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 20 + static_cast<int>(r.uniform() * 2000);
        const double mu = r.uniform(-0.6, 0.6);
        const double sd = r.uniform(0.01, 0.3);
        std::vector<double> d(n);
        for (auto& x : d) x = r.normal(mu, sd);
        const double alpha = r.uniform(0.01, 0.3);
        const IntervalHypothesis h(0, r.uniform(0.05, 0.5));
        const auto dec = rope_decide(d, h, alpha);
        const double slack = (1 - alpha) - 1.0 / n;
        if (dec.verdict == RopeVerdict::AcceptNull) {
            CHECK(dec.p_null >= slack);
            ++checked;
        }
        if (dec.verdict == RopeVerdict::RejectNull) {
            CHECK(dec.p_alt >= slack);
            ++checked;
        }
        // the refined rule depends only on the masses
        const auto expect = dec.p_null > 1 - alpha   ? RefinedVerdict::DeclareH0
                            : dec.p_alt > 1 - alpha ? RefinedVerdict::DeclareH1
                                                    : RefinedVerdict::NoDeclaration;
        CHECK(dec.refined_verdict == expect);
        // the HDI rule depends only on the interval
        const bool inside = h.in_null(dec.hdi.lower) && h.in_null(dec.hdi.upper);
        const bool outside = dec.hdi.upper < h.null_lower() || dec.hdi.lower > h.null_upper();
        CHECK((dec.verdict == RopeVerdict::AcceptNull) == inside);
        CHECK((dec.verdict == RopeVerdict::RejectNull) == outside);
    }
    CHECK(checked > 50);
}

TEST_CASE("enlarging delta never lowers the null mass") {
    Rng r(11);
    std::vector<double> d(5000);
    for (auto& x : d) x = r.normal(0.2, 0.3);
    double last = -1.0;
    for (double delta = 0.01; delta < 2.0; delta *= 1.3) {
        const double p0 = posterior_mass(std::span<const double>(d), IntervalHypothesis(0, delta)).p_null();
        CHECK(p0 >= last);
        last = p0;
    }
}

TEST_CASE("continuity eta1 example") {
    const IntervalHypothesis h(0, 0.1);
    const double u0 = 5.0;
    const double u1 = pdf_ref(2.0 / 3.0) / (0.15 * 2 * (1 - phi_ref(2.0 / 3.0)));
    const double eta1 = continuity_eta1(h, 0.15);
    CHECK(eta1 == doctest::Approx(u0 / (u0 + u1)).epsilon(1e-13));
    CHECK(eta1 == doctest::Approx(0.5425).epsilon(1e-3));
    const MixturePrior p(h, 0.15, eta1);
    const double eps = 1e-9;
    CHECK(mixture_density(p, 0.1 - eps) == doctest::Approx(mixture_density(p, 0.1 + eps)).epsilon(1e-6));
}

TEST_CASE("continuity eta1 limits") {
    CHECK(std::fabs(continuity_eta1(IntervalHypothesis(0, 0.1), 1e6) - 1.0) < 1e-3);
    const TruncatedNormalAltPrior alt(IntervalHypothesis(0, 0.4), 1.3);
    const double u1 = alt.boundary_density();
    CHECK(continuity_eta1(IntervalHypothesis(0, 0.4), 1.3) == doctest::Approx(1.25 / (1.25 + u1)).epsilon(1e-14));
}

TEST_CASE("equal boundary densities give eta1 = 1/2") {
    // find delta with 1/(2 delta) equal to the boundary density of pi1 for tau = 1
    double lo = 0.01, hi = 5.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gap = 0.5 / mid - TruncatedNormalAltPrior(IntervalHypothesis(0, mid), 1.0).boundary_density();
        (gap > 0 ? lo : hi) = mid;
    }
    CHECK(continuity_eta1(IntervalHypothesis(0, lo), 1.0) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("continuity eta1 makes the mixture continuous for many settings") {
    Rng r(12);
    for (int i = 0; i < 500; ++i) {
        const IntervalHypothesis h(r.uniform(-1, 1), r.uniform(0.01, 2.0));
        const double tau = r.uniform(0.01, 20.0);
        const double eta1 = continuity_eta1(h, tau);
        CHECK(eta1 > 0.0);
        CHECK(eta1 < 1.0);
        const MixturePrior p(h, tau, eta1);
        const double u0 = 0.5 / h.half_width();
        const double left = (1 - eta1) * u0;
        const double right = eta1 * p.alt_prior().boundary_density();
        CHECK(std::fabs(left - right) < 1e-10 * u0);
    }
    CHECK_THROWS_AS(continuity_eta1(IntervalHypothesis(0, 0.1), 0.0), InputError);
    CHECK_THROWS_AS(continuity_eta1(IntervalHypothesis(0, 0.1), -1.0), InputError);
}

TEST_CASE("full report reuses one posterior mass everywhere") {
    Rng r(13);
    std::vector<std::vector<double>> chains(2);
    for (auto& c : chains)
        for (int i = 0; i < 4000; ++i) c.push_back(r.normal(0.15, 0.1));
    const IntervalHypothesis h(0, 0.1);
    const auto rep = full_report(chains, h, 0.5, 0.05);
    CHECK(rep.bayes_factor.bf10 == doctest::Approx(rep.mass.p_alt / (1 - rep.mass.p_alt)).epsilon(1e-15));
    CHECK(rep.decision.p_alt == rep.mass.p_alt);
    CHECK(rep.decision.p_null == rep.mass.p_null());
    CHECK(rep.decision.hdi.lower == rep.hdi.lower);
    CHECK(rep.hdi.upper == rep.decision.hdi.upper);
    CHECK(rep.alpha == 0.05);
    CHECK(rep.mass.n_draws == 8000);
    CHECK_THROWS_AS(full_report(chains, h, 0.5, 1.5), InputError);
}
