#include "ibf/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ibf/errors.hpp"
#include "ibf/special.hpp"

namespace ibf {

namespace {

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(std::string(what) + " must be positive");
}

void require_eta1(double eta1) {
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw InputError("eta1 must lie in (0, 1)");
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sum_sq_dev(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s;
}

double log_choose(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Reads non-empty lines; the first must equal `header` exactly (after trimming).
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header,
                                                std::size_t columns) {
    std::string line;
    bool saw_header = false;
    std::vector<std::vector<std::string>> rows;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != header) throw InputError("expected CSV header '" + header + "', got '" + line + "'");
            saw_header = true;
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != columns)
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " fields");
        rows.push_back(std::move(fields));
    }
    if (!saw_header) throw InputError("CSV is empty; expected header '" + header + "'");
    return rows;
}

double parse_real(const std::string& s, int row) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw InputError("row " + std::to_string(row) + ": '" + s + "' is not a finite number");
    return v;
}

int parse_count(const std::string& s, int row) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InputError("row " + std::to_string(row) + ": '" + s + "' is not an integer count");
    return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

void TwoSampleData::validate() const {
    if (group_x.empty() || group_y.empty()) throw InputError("both groups need at least one value");
    for (const auto* g : {&group_x, &group_y})
        for (double v : *g)
            if (!std::isfinite(v)) throw InputError("group values must be finite");
}

void TwoSampleEffectModelConfig::validate() const {
    require_positive(delta, "delta");
    require_positive(tau, "tau");
    require_eta1(eta1);
    require_positive(prior_mu_sd, "prior_mu_sd");
    require_positive(sigma2_ig_shape, "sigma2_ig_shape");
    require_positive(sigma2_ig_rate, "sigma2_ig_rate");
    if (!std::isfinite(center)) throw InputError("center must be finite");
}

void MetaAnalysisData::validate() const {
    if (studies.empty()) throw InputError("meta-analysis needs at least one study");
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const auto& s = studies[i];
        if (s.n_treat < 1 || s.n_ctrl < 1 || s.y_treat < 0 || s.y_ctrl < 0 || s.y_treat > s.n_treat ||
            s.y_ctrl > s.n_ctrl)
            throw InputError("study " + std::to_string(i + 1) + ": counts must satisfy 0 <= y <= n, n >= 1");
    }
}

void MetaModelConfig::validate() const {
    require_positive(delta, "delta");
    require_positive(tau, "tau");
    require_eta1(eta1);
    require_positive(ctrl_logit_prior_sd, "ctrl_logit_prior_sd");
    require_positive(sigma2_ig_shape, "sigma2_ig_shape");
    require_positive(sigma2_ig_rate, "sigma2_ig_rate");
    if (!std::isfinite(center)) throw InputError("center must be finite");
}

ModelSpec build_two_sample_model(const TwoSampleData& data, const TwoSampleEffectModelConfig& cfg) {
    data.validate();
    cfg.validate();

    const double m = static_cast<double>(data.group_x.size());
    const double n = static_cast<double>(data.group_y.size());
    const double x_bar = mean_of(data.group_x);
    const double y_bar = mean_of(data.group_y);
    const double sxx = sum_sq_dev(data.group_x, x_bar);
    const double syy = sum_sq_dev(data.group_y, y_bar);
    const double pooled = (m + n > 2.0 && sxx + syy > 0.0) ? (sxx + syy) / (m + n - 2.0) : 1.0;
    const MixturePrior prior = cfg.prior();

    ModelSpec spec;
    spec.parameter_names = {"mu_x", "sigma2", "theta"};
    spec.supports = {Support::unbounded(), Support::positive(), Support::unbounded()};
    spec.log_posterior = [=](std::span<const double> p) {
        const double mu_x = p[0];
        const double sigma2 = p[1];
        const double theta = p[2];
        if (!(sigma2 > 0.0)) return -std::numeric_limits<double>::infinity();
        const double sigma = std::sqrt(sigma2);
        const double mu_y = mu_x + theta * sigma;
        const double log_2pi_s2 = std::log(2.0 * math::pi * sigma2);
        const double lik_x = -0.5 * m * log_2pi_s2 - (sxx + m * (x_bar - mu_x) * (x_bar - mu_x)) / (2.0 * sigma2);
        const double lik_y = -0.5 * n * log_2pi_s2 - (syy + n * (y_bar - mu_y) * (y_bar - mu_y)) / (2.0 * sigma2);
        return lik_x + lik_y + math::normal_log_pdf(mu_x, 0.0, cfg.prior_mu_sd) +
               math::inverse_gamma_log_pdf(sigma2, cfg.sigma2_ig_shape, cfg.sigma2_ig_rate) +
               prior.log_density(theta);
    };
    const double d_hat = (y_bar - x_bar) / std::sqrt(pooled);
    spec.initializer = [=](Rng& rng) {
        return std::vector<double>{x_bar + rng.normal(0.0, std::sqrt(pooled / m)),
                                   pooled * std::exp(rng.normal(0.0, 0.2)),
                                   d_hat + rng.normal(0.0, 0.25)};
    };
    return spec;
}

ModelSpec build_meta_model(const MetaAnalysisData& data, const MetaModelConfig& cfg) {
    data.validate();
    cfg.validate();

    const std::size_t k = data.studies.size();
    std::vector<double> constant(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& s = data.studies[i];
        constant[i] = log_choose(s.n_treat, s.y_treat) + log_choose(s.n_ctrl, s.y_ctrl);
    }
    const MixturePrior prior = cfg.prior();
    const auto studies = data.studies;

    ModelSpec spec;
    for (std::size_t i = 0; i < k; ++i) spec.parameter_names.push_back("ctrl_logit[" + std::to_string(i + 1) + "]");
    for (std::size_t i = 0; i < k; ++i) spec.parameter_names.push_back("effect[" + std::to_string(i + 1) + "]");
    spec.parameter_names.push_back("theta");
    spec.parameter_names.push_back("sigma2");
    spec.supports.assign(2 * k + 1, Support::unbounded());
    spec.supports.push_back(Support::positive());

    spec.log_posterior = [=](std::span<const double> p) {
        const double theta = p[2 * k];
        const double sigma2 = p[2 * k + 1];
        if (!(sigma2 > 0.0)) return -std::numeric_limits<double>::infinity();
        const double sigma = std::sqrt(sigma2);
        double lp = math::inverse_gamma_log_pdf(sigma2, cfg.sigma2_ig_shape, cfg.sigma2_ig_rate) +
                    prior.log_density(theta);
        for (std::size_t i = 0; i < k; ++i) {
            const auto& s = studies[i];
            const double a = p[i];
            const double b = a + p[k + i];
            lp += constant[i] + s.y_ctrl * a - s.n_ctrl * math::softplus(a) + s.y_treat * b -
                  s.n_treat * math::softplus(b);
            lp += math::normal_log_pdf(a, 0.0, cfg.ctrl_logit_prior_sd);
            lp += math::normal_log_pdf(p[k + i], theta, sigma);
        }
        return lp;
    };

    std::vector<double> emp_ctrl(k), emp_effect(k);
    for (std::size_t i = 0; i < k; ++i) {
        const auto& s = studies[i];
        const double pc = (s.y_ctrl + 0.5) / (s.n_ctrl + 1.0);
        const double pt = (s.y_treat + 0.5) / (s.n_treat + 1.0);
        emp_ctrl[i] = std::log(pc / (1.0 - pc));
        emp_effect[i] = std::log(pt / (1.0 - pt)) - emp_ctrl[i];
    }
    const double effect_mean = mean_of(emp_effect);
    const double effect_var = std::max(0.01, sum_sq_dev(emp_effect, effect_mean) / std::max<double>(1.0, k - 1.0));
    spec.initializer = [=](Rng& rng) {
        std::vector<double> x(2 * k + 2);
        for (std::size_t i = 0; i < k; ++i) x[i] = emp_ctrl[i] + rng.normal(0.0, 0.1);
        for (std::size_t i = 0; i < k; ++i) x[k + i] = emp_effect[i] + rng.normal(0.0, 0.1);
        x[2 * k] = effect_mean + rng.normal(0.0, 0.1);
        x[2 * k + 1] = effect_var * std::exp(rng.normal(0.0, 0.3));
        return x;
    };
    return spec;
}

ModelSpec build_toy_model(double y_obs, const IntervalHypothesis& h, double tau, double eta1,
                          double likelihood_variance) {
    if (!std::isfinite(y_obs)) throw InputError("toy model: y_obs must be finite");
    require_positive(likelihood_variance, "likelihood_variance");
    const MixturePrior prior(h, tau, eta1);
    const double sd = std::sqrt(likelihood_variance);

    ModelSpec spec;
    spec.parameter_names = {"theta"};
    spec.supports = {Support::unbounded()};
    spec.log_posterior = [=](std::span<const double> p) {
        return math::normal_log_pdf(y_obs, p[0], sd) + prior.log_density(p[0]);
    };
    spec.initializer = [=](Rng& rng) {
        const double u1 = rng.uniform_open();
        const double u2 = rng.uniform_open();
        return std::vector<double>{prior.sample(u1, u2)};
    };
    return spec;
}

TTestResult pooled_t_test(const TwoSampleData& data) {
    data.validate();
    const std::size_t m = data.group_x.size();
    const std::size_t n = data.group_y.size();
    if (m < 2 || n < 2) throw InputError("t test needs at least two values per group");
    const double x_bar = mean_of(data.group_x);
    const double y_bar = mean_of(data.group_y);
    const int df = static_cast<int>(m + n - 2);
    const double pooled = (sum_sq_dev(data.group_x, x_bar) + sum_sq_dev(data.group_y, y_bar)) / df;
    if (!(pooled > 0.0)) throw DegenerateError("t test: pooled variance is zero");

    TTestResult r;
    r.df = df;
    r.t = (y_bar - x_bar) / std::sqrt(pooled * (1.0 / m + 1.0 / n));
    r.p_value = math::incomplete_beta(0.5 * df, 0.5, df / (df + r.t * r.t));
    return r;
}

TwoSampleData calcium_data() {
    return {
        {-1, 12, -1, -3, 3, -5, 5, 2, -11, -1, -3},
        {7, -4, 18, 17, -3, -5, 1, 10, 11, -2},
    };
}

MetaAnalysisData betablocker_data() {
    // {y_treat, n_treat, y_ctrl, n_ctrl}
    return {{
        {3, 38, 3, 39},       {7, 114, 14, 116},    {5, 69, 11, 93},      {102, 1533, 127, 1520},
        {28, 355, 27, 365},   {4, 59, 6, 52},       {98, 945, 152, 939},  {60, 632, 48, 471},
        {25, 278, 37, 282},   {138, 1916, 188, 1921}, {64, 873, 52, 583}, {45, 263, 47, 266},
        {9, 291, 16, 293},    {57, 858, 45, 883},   {25, 154, 31, 147},   {33, 207, 38, 213},
        {28, 251, 12, 122},   {8, 151, 6, 154},     {6, 174, 3, 134},     {32, 209, 40, 218},
        {27, 391, 43, 364},   {22, 680, 39, 674},
    }};
}

std::uint64_t fingerprint(const TwoSampleData& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto mix = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto* g : {&data.group_x, &data.group_y}) {
        for (double v : *g) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            mix(bits);
        }
        mix(0xffffffffffffffffULL);
    }
    return h;
}

TwoSampleData read_two_sample_csv(std::istream& in) {
    TwoSampleData data;
    int row = 0;
    for (const auto& f : read_rows(in, "group,value", 2)) {
        ++row;
        const double v = parse_real(f[1], row);
        if (f[0] == "x")
            data.group_x.push_back(v);
        else if (f[0] == "y")
            data.group_y.push_back(v);
        else
            throw InputError("row " + std::to_string(row) + ": group must be 'x' or 'y'");
    }
    data.validate();
    return data;
}

TwoSampleData read_two_sample_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_two_sample_csv(in);
}

void write_two_sample_csv(std::ostream& out, const TwoSampleData& data) {
    out << "group,value\n";
    for (double v : data.group_x) out << "x," << v << '\n';
    for (double v : data.group_y) out << "y," << v << '\n';
}

MetaAnalysisData read_meta_csv(std::istream& in) {
    MetaAnalysisData data;
    int row = 0;
    for (const auto& f : read_rows(in, "study,y_treat,n_treat,y_ctrl,n_ctrl", 5)) {
        ++row;
        data.studies.push_back({parse_count(f[1], row), parse_count(f[2], row), parse_count(f[3], row),
                                parse_count(f[4], row)});
    }
    data.validate();
    return data;
}

MetaAnalysisData read_meta_csv(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return read_meta_csv(in);
}

void write_meta_csv(std::ostream& out, const MetaAnalysisData& data) {
    out << "study,y_treat,n_treat,y_ctrl,n_ctrl\n";
    for (std::size_t i = 0; i < data.studies.size(); ++i) {
        const auto& s = data.studies[i];
        out << i + 1 << ',' << s.y_treat << ',' << s.n_treat << ',' << s.y_ctrl << ',' << s.n_ctrl << '\n';
    }
}

}  // namespace ibf
