#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ibf/diagnostics.hpp"
#include "ibf/inference.hpp"
#include "ibf/models.hpp"
#include "ibf/sampler.hpp"

namespace ibf::app {

enum ExitCode : int {
    exit_ok = 0,
    exit_input = 2,
    exit_sampler = 3,
    exit_diagnostics = 4,
    exit_internal = 5,
};

/// Runs whose max split-R-hat exceeds this fail with exit_diagnostics.
inline constexpr double rhat_failure_threshold = 1.05;

enum class ModelKind { TwoSample, Meta, Toy };

/// tau as an absolute value or as a multiple of delta ("1.5delta").
struct TauSpec {
    double value = 0.5;
    bool relative_to_delta = false;

    double resolve(double delta) const { return relative_to_delta ? value * delta : value; }
};

/// eta1 as a number, "half", or "continuity".
struct Eta1Spec {
    enum class Mode { Value, Half, Continuity };
    Mode mode = Mode::Half;
    double value = 0.5;

    double resolve(const IntervalHypothesis& h, double tau) const;
    std::string label() const;
};

struct RunConfig {
    ModelKind model = ModelKind::Toy;
    std::optional<std::filesystem::path> data_path;
    double delta = 0.1;
    double center = 0.0;
    TauSpec tau;
    Eta1Spec eta1;
    double alpha = 0.05;
    int chains = 4;
    int warmup = 10000;
    int draws = 20000;
    std::uint64_t seed = 1;
    int threads = 0;
    std::optional<std::filesystem::path> output_path;
    std::optional<std::filesystem::path> draws_path;
    /// Observation for the toy model.
    double y_obs = 0.0;

    SamplerConfig sampler() const;
};

ModelKind parse_model_kind(const std::string& s);
std::string to_string(ModelKind m);
TauSpec parse_tau(const std::string& s);
Eta1Spec parse_eta1(const std::string& s);

/// Sets one RunConfig field from its key=value text form. Throws InputError
/// on unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

/// Flat `key=value` lines; `#` starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Defaults, then file values, then command-line values.
RunConfig resolve_run_config(const std::map<std::string, std::string>& file_values,
                             const std::map<std::string, std::string>& cli_values);

/// Writes via a temporary sibling file and an atomic rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

std::filesystem::path default_data_dir();

// --- commands -------------------------------------------------------------

/// Prints `error[<category>]: <message>` for the exception and returns its exit code.
int report_error(std::exception_ptr error, std::ostream& err);

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

struct Table3Row {
    double delta = 0.0;
    double tau = 0.0;
    double published_p_alt = 0.0;
    double published_bf10 = 0.0;
    InferenceReport report;
    Diagnostics diagnostics;
};

/// Runs the meta-analysis at delta in {0.1, 0.2, 0.3}, tau = 1.5 delta, eta1 = 1/2.
std::vector<Table3Row> reproduce_table3(const MetaAnalysisData& data, const SamplerConfig& sampler);
nlohmann::json table3_to_json(const std::vector<Table3Row>& rows, const SamplerConfig& sampler);
std::string format_table3(const std::vector<Table3Row>& rows);

struct Table3Options {
    std::optional<std::filesystem::path> data_path;
    std::optional<std::filesystem::path> output_path;
    SamplerConfig sampler;
};

int cmd_reproduce_table3(const Table3Options& options, std::ostream& out, std::ostream& err);

enum class SweepEta1Mode { Half, Continuity, Both };

SweepEta1Mode parse_sweep_mode(const std::string& s);

struct SweepRow {
    double tau = 0.0;
    std::string eta1_mode;
    double eta1 = 0.0;
    double p_alt = 0.0;
    double p_alt_se = 0.0;
    double bf10 = 0.0;
    double bf10_se = 0.0;
    double log10_bf10_se = 0.0;
    double max_split_rhat = 0.0;
};

inline const std::vector<double> default_tau_grid = {0.15, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};

std::vector<SweepRow> sweep_tau(const TwoSampleData& data, double delta, const std::vector<double>& tau_grid,
                                SweepEta1Mode mode, const SamplerConfig& sampler);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct SweepOptions {
    std::optional<std::filesystem::path> data_path;
    std::optional<std::filesystem::path> output_path;
    double delta = 0.1;
    std::vector<double> tau_grid = default_tau_grid;
    SweepEta1Mode mode = SweepEta1Mode::Both;
    SamplerConfig sampler;
};

int cmd_sweep_tau(const SweepOptions& options, std::ostream& out, std::ostream& err);

int cmd_ttest(const std::optional<std::filesystem::path>& data_path, std::ostream& out, std::ostream& err);

}  // namespace ibf::app
