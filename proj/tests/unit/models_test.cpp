#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "ibf/errors.hpp"
#include "ibf/inference.hpp"
#include "ibf/models.hpp"
#include "ibf/oracle.hpp"
#include "ibf/rng.hpp"

using namespace ibf;

namespace {

constexpr long double two_pi = 6.283185307179586476925286766559L;

long double log_normal(long double x, long double mean, long double var) {
    return -0.5L * std::log(two_pi * var) - (x - mean) * (x - mean) / (2.0L * var);
}

long double log_inv_gamma(long double x, long double a, long double b) {
    return a * std::log(b) - std::lgamma(a) - (a + 1.0L) * std::log(x) - b / x;
}

long double log_mixture(long double theta, double delta, double tau, double eta1) {
    if (std::fabs(theta) <= delta) return std::log(1.0L - eta1) - std::log(2.0L * delta);
    const long double mass = std::erfc(static_cast<long double>(delta) / (tau * std::sqrt(2.0L)));
    return std::log(static_cast<long double>(eta1)) + log_normal(theta, 0.0L, tau * static_cast<long double>(tau)) -
           std::log(mass);
}

long double log_binom(int n, int y, long double p) {
    return std::lgamma(n + 1.0L) - std::lgamma(y + 1.0L) - std::lgamma(n - y + 1.0L) + y * std::log(p) +
           (n - y) * std::log1p(-p);
}

// Every term summed observation by observation.
long double two_sample_reference(const TwoSampleData& d, double mu_x, double s2, double theta,
                                 const TwoSampleEffectModelConfig& c) {
    long double lp = 0;
    const long double mu_y = mu_x + theta * std::sqrt(static_cast<long double>(s2));
    for (double x : d.group_x) lp += log_normal(x, mu_x, s2);
    for (double y : d.group_y) lp += log_normal(y, mu_y, s2);
    lp += log_normal(mu_x, 0, c.prior_mu_sd * c.prior_mu_sd);
    lp += log_inv_gamma(s2, c.sigma2_ig_shape, c.sigma2_ig_rate);
    lp += log_mixture(theta, c.delta, c.tau, c.eta1);
    return lp;
}

long double meta_reference(const MetaAnalysisData& d, const std::vector<double>& p, const MetaModelConfig& c) {
    const std::size_t k = d.studies.size();
    const double theta = p[2 * k];
    const double s2 = p[2 * k + 1];
    long double lp = log_inv_gamma(s2, c.sigma2_ig_shape, c.sigma2_ig_rate) + log_mixture(theta, c.delta, c.tau, c.eta1);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& s = d.studies[i];
        const long double a = p[i];
        const long double b = a + p[k + i];
        lp += log_binom(s.n_ctrl, s.y_ctrl, 1.0L / (1.0L + std::exp(-a)));
        lp += log_binom(s.n_treat, s.y_treat, 1.0L / (1.0L + std::exp(-b)));
        lp += log_normal(a, 0, c.ctrl_logit_prior_sd * c.ctrl_logit_prior_sd);
        lp += log_normal(p[k + i], theta, s2);
    }
    return lp;
}

std::vector<double> pinned_meta_point(std::size_t k) {
    std::vector<double> p(2 * k + 2);
    for (std::size_t i = 0; i < k; ++i) {
        p[i] = -2.0 + 0.05 * i;
        p[k + i] = -0.3 + 0.02 * ((i * 7) % 11);
    }
    p[2 * k] = -0.25;
    p[2 * k + 1] = 0.04;
    return p;
}

double lp_at(const ModelSpec& m, const std::vector<double>& p) { return m.log_posterior(p); }

SamplerConfig quick(std::uint64_t seed = 1) {
    SamplerConfig c;
    c.warmup_iterations = 3000;
    c.sampling_iterations = 10000;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("embedded blood pressure data match the reference values") {
    const std::vector<double> placebo{-1, 12, -1, -3, 3, -5, 5, 2, -11, -1, -3};
    const std::vector<double> calcium{7, -4, 18, 17, -3, -5, 1, 10, 11, -2};
    const auto d = calcium_data();
    CHECK(d.group_x == placebo);
    CHECK(d.group_y == calcium);
    CHECK(fingerprint(d) == fingerprint(TwoSampleData{placebo, calcium}));
    CHECK(fingerprint(d) != fingerprint(TwoSampleData{calcium, placebo}));
    CHECK(fingerprint(read_two_sample_csv(std::filesystem::path(IBF_TEST_DATA_DIR) / "calcium.csv")) == fingerprint(d));
}

TEST_CASE("embedded meta-analysis data match the fixture file") {
    const auto file = read_meta_csv(std::filesystem::path(IBF_TEST_DATA_DIR) / "betablocker.csv");
    const auto emb = betablocker_data();
    REQUIRE(file.studies.size() == 22);
    REQUIRE(emb.studies.size() == 22);
    for (std::size_t i = 0; i < 22; ++i) {
        CHECK(file.studies[i].y_treat == emb.studies[i].y_treat);
        CHECK(file.studies[i].n_treat == emb.studies[i].n_treat);
        CHECK(file.studies[i].y_ctrl == emb.studies[i].y_ctrl);
        CHECK(file.studies[i].n_ctrl == emb.studies[i].n_ctrl);
    }
}

TEST_CASE("two-sample log posterior matches an observation-wise sum") {
    const auto d = calcium_data();
    TwoSampleEffectModelConfig c;
    c.delta = 0.1;
    c.tau = 0.5;
    c.eta1 = 0.5;
    const auto m = build_two_sample_model(d, c);
    CHECK(m.parameter_names == std::vector<std::string>{"mu_x", "sigma2", "theta"});
    const double points[][3] = {{0, 50, 0}, {-0.3, 60, 0.45}, {2, 20, -1.5}, {1, 80, 0.1}};
    for (const auto& p : points) {
        const double got = lp_at(m, {p[0], p[1], p[2]});
        CHECK(std::fabs(got - static_cast<double>(two_sample_reference(d, p[0], p[1], p[2], c))) <= 1e-10);
    }
}

TEST_CASE("two-sample likelihood is symmetric in the group labels at zero effect") {
    const auto d = calcium_data();
    const TwoSampleData swapped{d.group_y, d.group_x};
    TwoSampleEffectModelConfig c;
    const auto a = build_two_sample_model(d, c);
    const auto b = build_two_sample_model(swapped, c);
    for (double mu : {-2.0, 0.0, 3.0})
        for (double s2 : {10.0, 50.0}) CHECK(lp_at(a, {mu, s2, 0.0}) == doctest::Approx(lp_at(b, {mu, s2, 0.0})).epsilon(1e-14));
}

TEST_CASE("two-sample log posterior tails") {
    const auto d = calcium_data();
    const auto m = build_two_sample_model(d, {});
    Rng r(1);
    const auto init = m.initializer(r);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> p = init;
        p[0] += r.uniform(-3, 3);
        p[1] *= std::exp(r.uniform(-1, 1));
        p[2] += r.uniform(-1, 1);
        CHECK(std::isfinite(lp_at(m, p)));
    }
    double last = lp_at(m, init);
    for (double s2 = init[1] / 10; s2 > 1e-8; s2 /= 10) {
        const double v = lp_at(m, {init[0], s2, init[2]});
        CHECK(v < last);
        last = v;
    }
    CHECK(lp_at(m, {init[0], 0.0, init[2]}) == -INFINITY);
}

TEST_CASE("meta model has 2k + 2 named parameters") {
    const auto m = build_meta_model(betablocker_data(), {});
    CHECK(m.dimension() == 46);
    CHECK(m.parameter_names.front() == "ctrl_logit[1]");
    CHECK(m.parameter_names[22] == "effect[1]");
    CHECK(m.index_of("theta") == 44);
    CHECK(m.index_of("sigma2") == 45);
    CHECK(m.supports[45].kind == Support::Kind::Positive);
}

TEST_CASE("meta log posterior matches a term-by-term sum") {
    const auto d = betablocker_data();
    MetaModelConfig c;
    c.delta = 0.2;
    c.tau = 0.3;
    const auto m = build_meta_model(d, c);
    auto p = pinned_meta_point(22);
    CHECK(std::fabs(lp_at(m, p) - static_cast<double>(meta_reference(d, p, c))) <= 1e-10);
    p[44] = 0.05;  // theta inside the null interval
    CHECK(std::fabs(lp_at(m, p) - static_cast<double>(meta_reference(d, p, c))) <= 1e-10);
}

TEST_CASE("zero study effects give both arms the same binomial probability") {
    const MetaAnalysisData one{{{12, 100, 30, 150}}};
    MetaModelConfig c;
    const auto m = build_meta_model(one, c);
    const double a = -1.1;
    const double with_zero = lp_at(m, {a, 0.0, 0.0, 0.5});
    const long double pc = 1.0L / (1.0L + std::exp(-a));
    const long double expect = log_binom(150, 30, pc) + log_binom(100, 12, pc) + log_normal(a, 0, 100) +
                               log_normal(0, 0, 0.5) + log_inv_gamma(0.5, 0.01, 0.01) +
                               log_mixture(0.0, c.delta, c.tau, c.eta1);
    CHECK(std::fabs(with_zero - static_cast<double>(expect)) <= 1e-10);
}

TEST_CASE("meta log posterior is unchanged by permuting studies") {
    const auto d = betablocker_data();
    const auto m = build_meta_model(d, {});
    const auto p = pinned_meta_point(22);
    std::vector<std::size_t> perm(22);
    std::iota(perm.begin(), perm.end(), 0);
    Rng r(4);
    for (int trial = 0; trial < 5; ++trial) {
        for (std::size_t i = 21; i > 0; --i) std::swap(perm[i], perm[static_cast<std::size_t>(r.uniform() * (i + 1))]);
        MetaAnalysisData pd;
        std::vector<double> pp(46);
        for (std::size_t i = 0; i < 22; ++i) {
            pd.studies.push_back(d.studies[perm[i]]);
            pp[i] = p[perm[i]];
            pp[22 + i] = p[22 + perm[i]];
        }
        pp[44] = p[44];
        pp[45] = p[45];
        CHECK(lp_at(build_meta_model(pd, {}), pp) == doctest::Approx(lp_at(m, p)).epsilon(1e-13));
    }
}

TEST_CASE("meta log posterior tails") {
    const auto m = build_meta_model(betablocker_data(), {});
    Rng r(2);
    const auto init = m.initializer(r);
    for (int i = 0; i < 200; ++i) {
        auto p = init;
        for (std::size_t j = 0; j < 45; ++j) p[j] += r.uniform(-0.5, 0.5);
        p[45] *= std::exp(r.uniform(-1, 1));
        CHECK(std::isfinite(lp_at(m, p)));
    }
    for (double sign : {-1.0, 1.0}) {
        double last = lp_at(m, init);
        for (double step = 2; step < 1e4; step *= 4) {
            auto p = init;
            p[3] = init[3] + sign * step;
            const double v = lp_at(m, p);
            CHECK(v < last);
            last = v;
        }
    }
    double last = lp_at(m, init);
    for (double s2 = 1e-3; s2 > 1e-10; s2 /= 10) {
        auto p = init;
        p[45] = s2;
        const double v = lp_at(m, p);
        CHECK(v < last);
        last = v;
    }
}

TEST_CASE("standardized effect is invariant to a common shift") {
    auto d = calcium_data();
    TwoSampleEffectModelConfig c;
    c.delta = 0.1;
    c.tau = 0.5;
    const IntervalHypothesis h = c.hypothesis();
    const auto base = run_chains(build_two_sample_model(d, c), quick(3));
    for (auto* g : {&d.group_x, &d.group_y})
        for (auto& v : *g) v += 25.0;
    const auto shifted = run_chains(build_two_sample_model(d, c), quick(4));
    const auto a = posterior_mass(base.by_chain(2), h);
    const auto b = posterior_mass(shifted.by_chain(2), h);
    CHECK(std::fabs(a.p_alt - b.p_alt) <= 3 * std::hypot(a.standard_error, b.standard_error));
}

TEST_CASE("flat toy likelihood gives a unit Bayes factor") {
    const IntervalHypothesis h(0, 0.5);
    const auto o = toy_model_oracle(0.7, h, 1.0, 0.5, {}, 1e12);
    CHECK(o.bf10_exact == doctest::Approx(1.0).epsilon(1e-8));
    const auto m = build_toy_model(0.7, h, 1.0, 0.5, 1e12);
    const auto draws = run_chains(m, quick());
    const auto bf = bayes_factor(posterior_mass(draws.by_chain(0), h), 0.5);
    CHECK(std::fabs(bf.bf10 - 1.0) <= 3 * bf.standard_error());
}

TEST_CASE("extreme toy data engage degenerate handling") {
    const IntervalHypothesis h(0, 0.1);
    const auto m = build_toy_model(5.0, h, 1.0, 0.5);
    SamplerConfig c = quick();
    c.chains = 2;
    c.sampling_iterations = 250;
    const auto draws = run_chains(m, c);
    const auto mass = posterior_mass(draws.by_chain(0), h);
    REQUIRE(mass.alt_count == mass.n_draws);
    const auto bf = bayes_factor(mass, 0.5);
    CHECK(bf.degeneracy == Degeneracy::NoNullDraws);
    CHECK(std::isinf(bf.bf10));
    CHECK(bf.bound == doctest::Approx((1 - 0.006) / 0.006));
}

TEST_CASE("toy model log posterior") {
    const IntervalHypothesis h(0, 1);
    const auto m = build_toy_model(0.3, h, 2.0, 0.4);
    CHECK(lp_at(m, {0.2}) == doctest::Approx(static_cast<double>(log_normal(0.3, 0.2, 1) + log_mixture(0.2, 1, 2, 0.4))).epsilon(1e-13));
    CHECK(lp_at(m, {1.5}) == doctest::Approx(static_cast<double>(log_normal(0.3, 1.5, 1) + log_mixture(1.5, 1, 2, 0.4))).epsilon(1e-13));
    CHECK_THROWS_AS(build_toy_model(NAN, h, 2.0, 0.4), InputError);
    CHECK_THROWS_AS(build_toy_model(0.0, h, 2.0, 0.4, 0.0), InputError);
}

TEST_CASE("pooled t test on the blood pressure data") {
    const auto r = pooled_t_test(calcium_data());
    CHECK(r.df == 19);
    CHECK(std::fabs(r.t - 1.63) <= 0.01);
    CHECK(std::fabs(r.p_value - 0.12) <= 0.005);
    boost::math::students_t dist(19);
    CHECK(r.p_value == doctest::Approx(2 * boost::math::cdf(dist, -std::fabs(r.t))).epsilon(1e-12));
}

TEST_CASE("pooled t test edge cases") {
    const TwoSampleData same{{1, 2, 3, 4}, {1, 2, 3, 4}};
    const auto r = pooled_t_test(same);
    CHECK(r.t == 0.0);
    CHECK(r.p_value == 1.0);

    auto d = calcium_data();
    for (auto& v : d.group_y) v += 1000;
    const auto far = pooled_t_test(d);
    CHECK(far.p_value < 1e-6);
    boost::math::students_t dist(far.df);
    CHECK(far.p_value == doctest::Approx(2 * boost::math::cdf(dist, -far.t)).epsilon(1e-6));

    CHECK_THROWS_AS(pooled_t_test(TwoSampleData{{1.0}, {1, 2, 3}}), InputError);
    CHECK_THROWS_AS(pooled_t_test(TwoSampleData{{2, 2}, {5, 5, 5}}), DegenerateError);
}

TEST_CASE("two-sample CSV round trip and schema errors") {
    std::ostringstream out;
    write_two_sample_csv(out, calcium_data());
    std::istringstream in(out.str());
    CHECK(fingerprint(read_two_sample_csv(in)) == fingerprint(calcium_data()));

    const auto parse = [](const std::string& text) {
        std::istringstream s(text);
        return read_two_sample_csv(s);
    };
    CHECK(parse("group,value\nx,1\nx,2.5\ny,-3e1\n").group_y == std::vector<double>{-30});
    CHECK_THROWS_AS(parse("group,value\na,b,c\n"), InputError);
    CHECK_THROWS_AS(parse("grp,value\nx,1\n"), InputError);
    CHECK_THROWS_AS(parse("group,value\nz,1\n"), InputError);
    CHECK_THROWS_AS(parse("group,value\nx,abc\n"), InputError);
    CHECK_THROWS_AS(parse("group,value\nx,nan\ny,1\n"), InputError);
    CHECK_THROWS_AS(parse(""), InputError);
    CHECK_THROWS_AS(parse("group,value\nx,1\n").validate(), InputError);
    CHECK_THROWS_AS(read_two_sample_csv(std::filesystem::path("/nonexistent/file.csv")), InputError);
}

TEST_CASE("meta CSV round trip and schema errors") {
    std::ostringstream out;
    write_meta_csv(out, betablocker_data());
    std::istringstream in(out.str());
    CHECK(read_meta_csv(in).studies.size() == 22);

    const auto parse = [](const std::string& text) {
        std::istringstream s(text);
        return read_meta_csv(s);
    };
    CHECK_THROWS_AS(parse("study,y_treat,n_treat,y_ctrl,n_ctrl\n1,2,3\n"), InputError);
    CHECK_THROWS_AS(parse("study,yt,nt,yc,nc\n1,2,3,4,5\n"), InputError);
    CHECK_THROWS_AS(parse("study,y_treat,n_treat,y_ctrl,n_ctrl\n1,2.5,3,4,5\n"), InputError);
    CHECK_THROWS_AS(parse("study,y_treat,n_treat,y_ctrl,n_ctrl\n1,9,3,4,5\n"), InputError);
    CHECK_THROWS_AS(build_meta_model(MetaAnalysisData{{{-1, 3, 0, 4}}}, {}), InputError);
}

TEST_CASE("model configuration validation") {
    TwoSampleEffectModelConfig c;
    c.tau = 0;
    CHECK_THROWS_AS(build_two_sample_model(calcium_data(), c), InputError);
    c = {};
    c.eta1 = 1.0;
    CHECK_THROWS_AS(c.validate(), InputError);
    MetaModelConfig mc;
    mc.delta = -1;
    CHECK_THROWS_AS(mc.validate(), InputError);
    CHECK_THROWS_AS(build_two_sample_model(TwoSampleData{{}, {1.0}}, {}), InputError);
}
