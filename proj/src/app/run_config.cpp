#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "ibf/app.hpp"
#include "ibf/errors.hpp"

namespace ibf::app {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw InputError(key + ": '" + text + "' is not a number");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw InputError(key + ": '" + text + "' is not an integer");
    return v;
}

int parse_count(const std::string& key, const std::string& text) {
    const int v = parse_int<int>(key, text);
    if (v < 1) throw InputError(key + " must be at least 1");
    return v;
}

}  // namespace

double Eta1Spec::resolve(const IntervalHypothesis& h, double tau) const {
    switch (mode) {
        case Mode::Half: return 0.5;
        case Mode::Continuity: return continuity_eta1(h, tau);
        case Mode::Value: return value;
    }
    return value;
}

std::string Eta1Spec::label() const {
    switch (mode) {
        case Mode::Half: return "half";
        case Mode::Continuity: return "continuity";
        case Mode::Value: return "value";
    }
    return "value";
}

SamplerConfig RunConfig::sampler() const {
    SamplerConfig s;
    s.chains = chains;
    s.warmup_iterations = warmup;
    s.sampling_iterations = draws;
    s.seed = seed;
    s.threads = threads;
    return s;
}

ModelKind parse_model_kind(const std::string& s) {
    if (s == "two_sample") return ModelKind::TwoSample;
    if (s == "meta") return ModelKind::Meta;
    if (s == "toy") return ModelKind::Toy;
    throw InputError("model must be one of two_sample, meta, toy (got '" + s + "')");
}

std::string to_string(ModelKind m) {
    switch (m) {
        case ModelKind::TwoSample: return "two_sample";
        case ModelKind::Meta: return "meta";
        case ModelKind::Toy: return "toy";
    }
    return "toy";
}

TauSpec parse_tau(const std::string& s) {
    constexpr std::string_view suffix = "delta";
    TauSpec t;
    if (s.size() > suffix.size() && s.ends_with(suffix)) {
        t.relative_to_delta = true;
        t.value = parse_double("tau", s.substr(0, s.size() - suffix.size()));
    } else {
        t.value = parse_double("tau", s);
    }
    if (!(t.value > 0.0)) throw InputError("tau must be positive");
    return t;
}

Eta1Spec parse_eta1(const std::string& s) {
    Eta1Spec e;
    if (s == "half") {
        e.mode = Eta1Spec::Mode::Half;
        e.value = 0.5;
    } else if (s == "continuity") {
        e.mode = Eta1Spec::Mode::Continuity;
    } else {
        e.mode = Eta1Spec::Mode::Value;
        e.value = parse_double("eta1", s);
        if (!(e.value > 0.0 && e.value < 1.0)) throw InputError("eta1 must lie in (0, 1)");
    }
    return e;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string value = trim(raw);
    if (key == "model") c.model = parse_model_kind(value);
    else if (key == "data_path") c.data_path = value;
    else if (key == "delta") {
        c.delta = parse_double(key, value);
        if (!(c.delta > 0.0)) throw InputError("delta must be positive");
    }
    else if (key == "center") c.center = parse_double(key, value);
    else if (key == "tau") c.tau = parse_tau(value);
    else if (key == "eta1") c.eta1 = parse_eta1(value);
    else if (key == "alpha") {
        c.alpha = parse_double(key, value);
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
    }
    else if (key == "chains") c.chains = parse_count(key, value);
    else if (key == "warmup") c.warmup = parse_count(key, value);
    else if (key == "draws") c.draws = parse_count(key, value);
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(key, value);
    else if (key == "threads") c.threads = parse_int<int>(key, value);
    else if (key == "output_path") c.output_path = value;
    else if (key == "draws_path") c.draws_path = value;
    else if (key == "y_obs") c.y_obs = parse_double(key, value);
    else throw InputError("unknown setting '" + key + "'");
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path.string() + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

RunConfig resolve_run_config(const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& cli_values) {
    RunConfig c;
    for (const auto& [k, v] : file_values) apply_setting(c, k, v);
    for (const auto& [k, v] : cli_values) apply_setting(c, k, v);
    return c;
}

}  // namespace ibf::app
