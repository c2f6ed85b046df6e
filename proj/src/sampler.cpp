#include "ibf/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "ibf/errors.hpp"

namespace ibf {

Support Support::interval(double lower, double upper) {
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper))
        throw InputError("interval support requires finite lower < upper");
    return {Kind::Interval, lower, upper};
}

bool Support::contains(double x) const {
    switch (kind) {
        case Kind::Unbounded: return std::isfinite(x);
        case Kind::Positive: return x > 0.0 && std::isfinite(x);
        case Kind::Interval: return x > lower && x < upper;
    }
    return false;
}

double transform_to_unconstrained(double value, const Support& support) {
    if (!support.contains(value))
        throw TransformError("value " + std::to_string(value) + " is not inside its support");
    switch (support.kind) {
        case Support::Kind::Unbounded: return value;
        case Support::Kind::Positive: return std::log(value);
        case Support::Kind::Interval: {
            const double u = (value - support.lower) / (support.upper - support.lower);
            return std::log(u) - std::log1p(-u);
        }
    }
    return value;
}

double transform_to_constrained(double z, const Support& support) {
    switch (support.kind) {
        case Support::Kind::Unbounded: return z;
        case Support::Kind::Positive: return std::exp(z);
        case Support::Kind::Interval: {
            const double u = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
            return support.lower + (support.upper - support.lower) * u;
        }
    }
    return z;
}

double log_jacobian(double z, const Support& support) {
    switch (support.kind) {
        case Support::Kind::Unbounded: return 0.0;
        case Support::Kind::Positive: return z;
        case Support::Kind::Interval: {
            // log(width * u (1 - u)) with u = inv_logit(z)
            const double a = std::fabs(z);
            return std::log(support.upper - support.lower) - a - 2.0 * std::log1p(std::exp(-a));
        }
    }
    return 0.0;
}

std::size_t ModelSpec::index_of(const std::string& name) const {
    const auto it = std::find(parameter_names.begin(), parameter_names.end(), name);
    if (it == parameter_names.end()) throw InputError("unknown parameter '" + name + "'");
    return static_cast<std::size_t>(it - parameter_names.begin());
}

void ModelSpec::validate() const {
    if (parameter_names.empty()) throw InputError("model has no parameters");
    if (supports.size() != parameter_names.size())
        throw InputError("model supports and parameter names differ in length");
    if (!log_posterior) throw InputError("model has no log posterior");
}

void SamplerConfig::validate() const {
    if (chains < 1 || warmup_iterations < 1 || sampling_iterations < 1)
        throw InputError("sampler chain and iteration counts must be at least 1");
    if (!(target_acceptance > 0.1 && target_acceptance < 0.9))
        throw InputError("target acceptance must lie in (0.1, 0.9)");
    if (!(initial_step_scale > 0.0) || !std::isfinite(initial_step_scale))
        throw InputError("initial step scale must be positive");
    if (threads < 0) throw InputError("thread count must be non-negative");
}

DrawMatrix::DrawMatrix(std::vector<std::string> names, int chains, int iterations,
                       std::uint64_t seed)
    : names_(std::move(names)), chains_(chains), iterations_(iterations), seed_(seed),
      values_(static_cast<std::size_t>(chains) * iterations * names_.size()) {}

std::size_t DrawMatrix::index_of(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw InputError("unknown parameter '" + name + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

double& DrawMatrix::at(int chain, int iteration, std::size_t parameter) {
    return values_[(static_cast<std::size_t>(chain) * iterations_ + iteration) * names_.size() + parameter];
}

double DrawMatrix::at(int chain, int iteration, std::size_t parameter) const {
    return values_[(static_cast<std::size_t>(chain) * iterations_ + iteration) * names_.size() + parameter];
}

std::vector<double> DrawMatrix::chain_column(int chain, std::size_t parameter) const {
    std::vector<double> out(iterations_);
    for (int i = 0; i < iterations_; ++i) out[i] = at(chain, i, parameter);
    return out;
}

std::vector<std::vector<double>> DrawMatrix::by_chain(std::size_t parameter) const {
    std::vector<std::vector<double>> out;
    out.reserve(chains_);
    for (int c = 0; c < chains_; ++c) out.push_back(chain_column(c, parameter));
    return out;
}

std::vector<double> DrawMatrix::pooled(std::size_t parameter) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(chains_) * iterations_);
    for (int c = 0; c < chains_; ++c)
        for (int i = 0; i < iterations_; ++i) out.push_back(at(c, i, parameter));
    return out;
}

namespace {

constexpr int max_init_attempts = 100;

struct ChainOutput {
    std::vector<double> acceptance;
    std::vector<double> scales_at_freeze;
    std::vector<double> scales_at_end;
};

std::vector<double> initial_point(const ModelSpec& model, Rng& rng,
                                  const std::optional<std::vector<double>>& init) {
    const std::size_t d = model.dimension();
    const auto admissible = [&](const std::vector<double>& x) {
        if (x.size() != d) return false;
        for (std::size_t j = 0; j < d; ++j)
            if (!model.supports[j].contains(x[j])) return false;
        return std::isfinite(model.log_posterior(x));
    };

    if (init) {
        if (!admissible(*init))
            throw InitializationError("supplied initial point is outside the support or has non-finite log posterior");
        return *init;
    }
    for (int attempt = 0; attempt < max_init_attempts; ++attempt) {
        std::vector<double> x;
        if (model.initializer) {
            x = model.initializer(rng);
        } else {
            x.resize(d);
            for (std::size_t j = 0; j < d; ++j)
                x[j] = transform_to_constrained(rng.uniform(-2.0, 2.0), model.supports[j]);
        }
        if (admissible(x)) return x;
    }
    throw InitializationError("no finite log posterior after " + std::to_string(max_init_attempts) +
                              " initialization attempts");
}

ChainOutput run_one_chain(const ModelSpec& model, const SamplerConfig& config,
                          const std::optional<std::vector<double>>& init, int chain,
                          DrawMatrix& out) {
    Rng rng = Rng::stream(config.seed, static_cast<std::uint64_t>(chain));
    const std::size_t d = model.dimension();

    std::vector<double> x = initial_point(model, rng, init);
    std::vector<double> z(d), jac(d);
    for (std::size_t j = 0; j < d; ++j) {
        z[j] = transform_to_unconstrained(x[j], model.supports[j]);
        jac[j] = log_jacobian(z[j], model.supports[j]);
    }
    double log_lik = model.log_posterior(x);
    double jac_sum = 0.0;
    for (double v : jac) jac_sum += v;

    std::vector<double> log_scale(d, std::log(config.initial_step_scale));
    std::vector<long> accepted(d, 0);
    ChainOutput result;

    const int total = config.warmup_iterations + config.sampling_iterations;
    for (int t = 0; t < total; ++t) {
        const bool warmup = t < config.warmup_iterations;
        const double gain = warmup ? std::pow(static_cast<double>(t) + 1.0, -0.6) : 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const auto& support = model.supports[j];
            const double z_new = z[j] + std::exp(log_scale[j]) * rng.normal();
            const double x_new = transform_to_constrained(z_new, support);
            const double log_u = std::log(rng.uniform_open());

            double accept_prob = 0.0;
            bool accept = false;
            if (support.contains(x_new)) {
                const double x_old = x[j];
                x[j] = x_new;
                const double lp_new = model.log_posterior(x);
                const double jac_new = log_jacobian(z_new, support);
                const double log_ratio = (lp_new + jac_new) - (log_lik + jac[j]);
                if (std::isfinite(lp_new) && !std::isnan(log_ratio)) {
                    accept_prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
                    accept = log_u < log_ratio;
                }
                if (accept) {
                    z[j] = z_new;
                    jac_sum += jac_new - jac[j];
                    jac[j] = jac_new;
                    log_lik = lp_new;
                } else {
                    x[j] = x_old;
                }
            }
            if (warmup) {
                log_scale[j] += gain * (accept_prob - config.target_acceptance);
                log_scale[j] = std::clamp(log_scale[j], -30.0, 10.0);
            } else if (accept) {
                ++accepted[j];
            }
        }
        if (t + 1 == config.warmup_iterations) {
            result.scales_at_freeze.resize(d);
            for (std::size_t j = 0; j < d; ++j) result.scales_at_freeze[j] = std::exp(log_scale[j]);
        }
        if (!warmup) {
            const int i = t - config.warmup_iterations;
            for (std::size_t j = 0; j < d; ++j) out.at(chain, i, j) = x[j];
        }
    }
    result.scales_at_end.resize(d);
    result.acceptance.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        result.scales_at_end[j] = std::exp(log_scale[j]);
        result.acceptance[j] = static_cast<double>(accepted[j]) / config.sampling_iterations;
    }
    return result;
}

}  // namespace

DrawMatrix run_chains(const ModelSpec& model, const SamplerConfig& config,
                      const std::optional<std::vector<double>>& init) {
    model.validate();
    config.validate();
    if (init && init->size() != model.dimension())
        throw InputError("initial point has " + std::to_string(init->size()) + " values, model has " +
                         std::to_string(model.dimension()) + " parameters");

    DrawMatrix draws(model.parameter_names, config.chains, config.sampling_iterations, config.seed);
    std::vector<ChainOutput> outputs(config.chains);
    std::vector<std::exception_ptr> errors(config.chains);

    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(config.chains));

    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int c = next++; c < config.chains; c = next++) {
            try {
                outputs[c] = run_one_chain(model, config, init, c, draws);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (const auto& o : outputs) {
        draws.acceptance_rates.push_back(o.acceptance);
        draws.step_scales_at_freeze.push_back(o.scales_at_freeze);
        draws.step_scales_at_end.push_back(o.scales_at_end);
    }
    return draws;
}

void write_draws_csv(std::ostream& out, const DrawMatrix& draws) {
    out << "chain,iteration";
    for (const auto& n : draws.parameter_names()) out << ',' << n;
    out << '\n';
    char buf[40];
    for (int c = 0; c < draws.chains(); ++c) {
        for (int i = 0; i < draws.iterations(); ++i) {
            out << c + 1 << ',' << i + 1;
            for (std::size_t p = 0; p < draws.parameters(); ++p) {
                std::snprintf(buf, sizeof buf, "%.17g", draws.at(c, i, p));
                out << ',' << buf;
            }
            out << '\n';
        }
    }
}

}  // namespace ibf
