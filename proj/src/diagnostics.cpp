#include "ibf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>

#include <fftw3.h>

#include "ibf/errors.hpp"
#include "ibf/special.hpp"

namespace ibf {

double Diagnostics::max_split_rhat() const {
    double m = 1.0;
    for (double r : split_rhat) m = std::max(m, r);
    return m;
}

double Diagnostics::min_ess() const {
    double m = std::numeric_limits<double>::infinity();
    for (double e : ess) m = std::min(m, e);
    return m;
}

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double mean) {
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / static_cast<double>(x.size() - 1);
}

// FFTW planning is not thread-safe; execution with distinct buffers is.
std::mutex fftw_plan_mutex;

// Biased autocovariances (divisor n) at every lag, via a zero-padded FFT.
std::vector<double> autocovariances(std::span<const double> x, double mean) {
    const std::size_t n = x.size();
    std::size_t len = 1;
    while (len < 2 * n) len <<= 1;
    const std::size_t bins = len / 2 + 1;

    double* signal = fftw_alloc_real(len);
    fftw_complex* spectrum = fftw_alloc_complex(bins);
    fftw_plan forward, backward;
    {
        std::lock_guard lock(fftw_plan_mutex);
        forward = fftw_plan_dft_r2c_1d(static_cast<int>(len), signal, spectrum, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(len), spectrum, signal, FFTW_ESTIMATE);
    }
    for (std::size_t i = 0; i < len; ++i) signal[i] = i < n ? x[i] - mean : 0.0;
    fftw_execute(forward);
    for (std::size_t k = 0; k < bins; ++k) {
        spectrum[k][0] = spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1];
        spectrum[k][1] = 0.0;
    }
    fftw_execute(backward);
    std::vector<double> acov(n);
    for (std::size_t lag = 0; lag < n; ++lag)
        acov[lag] = signal[lag] / static_cast<double>(len) / static_cast<double>(n);
    {
        std::lock_guard lock(fftw_plan_mutex);
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    fftw_free(signal);
    fftw_free(spectrum);
    return acov;
}

// Classic (Gelman-Rubin) ratio over already-split sequences of equal length.
double rhat_of_sequences(const std::vector<std::span<const double>>& seqs) {
    const double n = static_cast<double>(seqs.front().size());
    const double m = static_cast<double>(seqs.size());
    std::vector<double> means, vars;
    for (const auto& s : seqs) {
        means.push_back(mean_of(s));
        vars.push_back(variance_of(s, means.back()));
    }
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double between = 0.0;
    for (double mu : means) between += (mu - grand) * (mu - grand);
    between *= n / (m - 1.0);
    const double within = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
    if (!(within > 0.0)) return between > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    const double var_plus = (n - 1.0) / n * within + between / n;
    return std::sqrt(var_plus / within);
}

std::vector<std::span<const double>> split_halves(const std::vector<std::vector<double>>& chains) {
    std::vector<std::span<const double>> out;
    for (const auto& c : chains) {
        const std::size_t half = c.size() / 2;
        std::span<const double> s(c);
        out.push_back(s.subspan(0, half));
        out.push_back(s.subspan(c.size() - half, half));
    }
    return out;
}

std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t c = 0; c < chains.size(); ++c)
        for (std::size_t i = 0; i < chains[c].size(); ++i)
            all.emplace_back(chains[c][i], c * chains[c].size() + i);
    std::sort(all.begin(), all.end());
    const double total = static_cast<double>(all.size());
    std::vector<double> z(all.size());
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].first == all[i].first) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        const double value = math::normal_quantile((avg_rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k < j; ++k) z[all[k].second] = value;
        i = j;
    }
    std::vector<std::vector<double>> out(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c)
        out[c].assign(z.begin() + c * chains[c].size(), z.begin() + (c + 1) * chains[c].size());
    return out;
}

}  // namespace

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 2) return static_cast<double>(n);
    const double mean = mean_of(chain);
    bool constant = true;
    for (double v : chain) constant = constant && v == chain[0];
    if (constant) return static_cast<double>(n);
    const auto acov = autocovariances(chain, mean);
    const double gamma0 = acov[0];
    if (!(gamma0 > 0.0)) return static_cast<double>(n);

    double tau = -1.0;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double pair = (acov[2 * k] + acov[2 * k + 1]) / gamma0;
        if (pair < 0.0) break;
        tau += 2.0 * pair;
    }
    const double ess = static_cast<double>(n) / std::max(tau, 1e-12);
    return std::min(ess, static_cast<double>(n));
}

double pooled_effective_sample_size(const std::vector<std::vector<double>>& chains) {
    double total = 0.0;
    for (const auto& c : chains) total += effective_sample_size(c);
    return total;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.size() < 2) throw DiagnosticsError("split-R-hat needs at least two chains");
    const std::size_t n = chains.front().size();
    for (const auto& c : chains)
        if (c.size() != n) throw DiagnosticsError("split-R-hat needs chains of equal length");
    if (n < 4) throw DiagnosticsError("split-R-hat needs at least 4 draws per chain");

    const double raw = rhat_of_sequences(split_halves(chains));
    const auto ranked = rank_normalize(chains);
    const double rank = rhat_of_sequences(split_halves(ranked));
    return std::max(raw, rank);
}

Diagnostics diagnose(const DrawMatrix& draws) {
    if (draws.chains() < 2) throw DiagnosticsError("diagnostics need at least two chains");
    if (draws.iterations() < 100) throw DiagnosticsError("diagnostics need at least 100 draws per chain");

    Diagnostics d;
    d.parameter_names = draws.parameter_names();
    d.chain_means.assign(draws.chains(), std::vector<double>(draws.parameters()));
    d.chain_sds = d.chain_means;
    for (std::size_t p = 0; p < draws.parameters(); ++p) {
        const auto chains = draws.by_chain(p);
        d.ess.push_back(pooled_effective_sample_size(chains));
        d.split_rhat.push_back(split_rhat(chains));
        for (int c = 0; c < draws.chains(); ++c) {
            const double m = mean_of(chains[c]);
            d.chain_means[c][p] = m;
            d.chain_sds[c][p] = std::sqrt(variance_of(chains[c], m));
        }
    }
    return d;
}

}  // namespace ibf
