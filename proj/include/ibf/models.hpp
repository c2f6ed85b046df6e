#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ibf/hypothesis.hpp"
#include "ibf/sampler.hpp"

namespace ibf {

/// Two groups sharing a common variance. x is the reference (placebo) group,
/// y the treatment group.
struct TwoSampleData {
    std::vector<double> group_x;
    std::vector<double> group_y;

    void validate() const;
};

/// Standardized effect theta = (mu_y - mu_x) / sigma with mixture prior on theta.
struct TwoSampleEffectModelConfig {
    double delta = 0.1;
    double tau = 0.5;
    double eta1 = 0.5;
    double center = 0.0;
    double prior_mu_sd = 100.0;
    double sigma2_ig_shape = 0.01;
    double sigma2_ig_rate = 0.01;

    void validate() const;
    IntervalHypothesis hypothesis() const { return {center, delta}; }
    MixturePrior prior() const { return {hypothesis(), tau, eta1}; }
};

struct MetaStudy {
    int y_treat = 0;
    int n_treat = 0;
    int y_ctrl = 0;
    int n_ctrl = 0;
};

struct MetaAnalysisData {
    std::vector<MetaStudy> studies;

    void validate() const;
};

/// Random-effects logistic meta-analysis; theta is the mean log odds ratio.
struct MetaModelConfig {
    double delta = 0.1;
    double tau = 0.15;
    double eta1 = 0.5;
    double center = 0.0;
    double ctrl_logit_prior_sd = 10.0;
    double sigma2_ig_shape = 0.01;
    double sigma2_ig_rate = 0.01;

    void validate() const;
    IntervalHypothesis hypothesis() const { return {center, delta}; }
    MixturePrior prior() const { return {hypothesis(), tau, eta1}; }
};

/// Parameters: mu_x, sigma2, theta.
ModelSpec build_two_sample_model(const TwoSampleData& data, const TwoSampleEffectModelConfig& cfg);

/// Parameters: ctrl_logit[1..k], effect[1..k], theta, sigma2 (2k + 2 in total).
ModelSpec build_meta_model(const MetaAnalysisData& data, const MetaModelConfig& cfg);

/// One observation y ~ N(theta, likelihood_variance) with the mixture prior on
/// theta. A huge variance makes the likelihood flat. Parameter: theta.
ModelSpec build_toy_model(double y_obs, const IntervalHypothesis& h, double tau, double eta1,
                          double likelihood_variance = 1.0);

struct TTestResult {
    double t = 0.0;
    double p_value = 1.0;
    int df = 0;
};

/// Equal-variance two-sample t test of mean(y) - mean(x); two-sided p.
TTestResult pooled_t_test(const TwoSampleData& data);

/// Blood pressure change, calcium (y, 10 men) versus placebo (x, 11 men).
TwoSampleData calcium_data();
/// 22 beta-blocker mortality trials.
MetaAnalysisData betablocker_data();

/// FNV-1a over the IEEE bit patterns of both groups, with a group separator.
std::uint64_t fingerprint(const TwoSampleData& data);

/// `group,value` with group in {x, y}.
TwoSampleData read_two_sample_csv(std::istream& in);
TwoSampleData read_two_sample_csv(const std::filesystem::path& path);
void write_two_sample_csv(std::ostream& out, const TwoSampleData& data);

/// `study,y_treat,n_treat,y_ctrl,n_ctrl`.
MetaAnalysisData read_meta_csv(std::istream& in);
MetaAnalysisData read_meta_csv(const std::filesystem::path& path);
void write_meta_csv(std::ostream& out, const MetaAnalysisData& data);

}  // namespace ibf
