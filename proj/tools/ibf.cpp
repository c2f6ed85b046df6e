// ibf: interval-null Bayes factors from posterior draws.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ibf/app.hpp"

namespace {

constexpr const char* footer = R"(Exit codes:
  0  success
  2  input error (unreadable file, CSV schema mismatch, bad option value, degenerate data)
  3  sampler error (no finite starting point found)
  4  diagnostics failure (max split R-hat above 1.05, or too few draws to diagnose)
  5  internal error
Errors are printed to stderr as `error[<category>]: <message>`.

Settings precedence for `run`: command-line flags override values from
--config FILE, which override built-in defaults. The config file holds
flat key=value lines using the field names model, data_path, delta,
center, tau, eta1, alpha, chains, warmup, draws, seed, threads,
output_path, draws_path, y_obs. `#` starts a comment.)";

struct SamplerFlags {
    int chains = 4;
    int warmup = 10000;
    int draws = 20000;
    std::uint64_t seed = 1;
    int threads = 0;

    void attach(CLI::App& cmd) {
        cmd.add_option("--chains", chains, "Number of chains")->capture_default_str();
        cmd.add_option("--warmup", warmup, "Warmup iterations per chain")->capture_default_str();
        cmd.add_option("--draws", draws, "Post-warmup draws per chain")->capture_default_str();
        cmd.add_option("--seed", seed, "RNG seed")->capture_default_str();
        cmd.add_option("--threads", threads, "Cap on concurrently running chains (0 = hardware count)")
            ->capture_default_str();
    }

    ibf::SamplerConfig config() const {
        ibf::SamplerConfig c;
        c.chains = chains;
        c.warmup_iterations = warmup;
        c.sampling_iterations = draws;
        c.seed = seed;
        c.threads = threads;
        return c;
    }
};

}  // namespace

int main(int argc, char** argv) {
    using namespace ibf::app;

    CLI::App app{"Bayes factors and ROPE decisions for interval null hypotheses"};
    app.footer(footer);
    app.require_subcommand(1);

    // run: every flag maps onto a RunConfig key and only counts when given.
    auto* run = app.add_subcommand("run", "Fit a model and write an inference report");
    std::string config_path;
    run->add_option("--config", config_path, "key=value settings file");
    const std::vector<std::pair<std::string, std::string>> run_flags = {
        {"--model", "model"},     {"--data", "data_path"},    {"--delta", "delta"},
        {"--center", "center"},   {"--tau", "tau"},           {"--eta1", "eta1"},
        {"--alpha", "alpha"},     {"--chains", "chains"},     {"--warmup", "warmup"},
        {"--draws", "draws"},     {"--seed", "seed"},         {"--threads", "threads"},
        {"--output", "output_path"}, {"--draws-out", "draws_path"}, {"--y", "y_obs"},
    };
    const std::map<std::string, std::string> run_help = {
        {"model", "two_sample | meta | toy"},
        {"data_path", "CSV data file (embedded fixture when omitted)"},
        {"delta", "Half-width of the null interval"},
        {"center", "Center of the null interval"},
        {"tau", "Alternative prior scale, a number or e.g. 1.5delta"},
        {"eta1", "Prior mass of the alternative: number, half or continuity"},
        {"alpha", "HDI tail mass"},
        {"chains", "Number of chains"},
        {"warmup", "Warmup iterations per chain"},
        {"draws", "Post-warmup draws per chain"},
        {"seed", "RNG seed"},
        {"threads", "Cap on concurrently running chains"},
        {"output_path", "Write the JSON report here instead of stdout"},
        {"draws_path", "Also write all draws as CSV"},
        {"y_obs", "Observation for the toy model"},
    };
    std::map<std::string, std::string> run_values;
    std::vector<std::pair<CLI::Option*, std::string>> run_opts;
    for (const auto& [flag, key] : run_flags)
        run_opts.emplace_back(run->add_option(flag, run_values[key], run_help.at(key)), key);

    auto* table3 = app.add_subcommand("reproduce-table3", "Meta-analysis Bayes factors at delta = 0.1, 0.2, 0.3");
    Table3Options t3;
    std::string t3_data, t3_out;
    SamplerFlags t3_sampler;
    table3->add_option("--data", t3_data, "Meta-analysis CSV (embedded fixture when omitted)");
    table3->add_option("--output", t3_out, "Write JSON here instead of stdout");
    t3_sampler.attach(*table3);

    auto* sweep = app.add_subcommand("sweep-tau", "Two-sample Bayes factors over a grid of tau, as CSV");
    SweepOptions sw;
    std::string sw_data, sw_out, sw_mode = "both";
    SamplerFlags sw_sampler;
    sweep->add_option("--data", sw_data, "Two-sample CSV (embedded fixture when omitted)");
    sweep->add_option("--output", sw_out, "Write CSV here instead of stdout");
    sweep->add_option("--delta", sw.delta, "Half-width of the null interval")->capture_default_str();
    sweep->add_option("--tau-grid", sw.tau_grid, "Comma-separated tau values")->delimiter(',')->capture_default_str();
    sweep->add_option("--eta1-mode", sw_mode, "half | continuity | both")->capture_default_str();
    sw_sampler.attach(*sweep);

    auto* ttest = app.add_subcommand("ttest", "Pooled-variance two-sample t test");
    std::string tt_data;
    ttest->add_option("--data", tt_data, "Two-sample CSV (embedded fixture when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_input;
    }

    auto opt_path = [](const std::string& s) {
        return s.empty() ? std::optional<std::filesystem::path>{} : std::optional<std::filesystem::path>{s};
    };

    if (run->parsed()) {
        RunConfig config;
        try {
            std::map<std::string, std::string> cli_values;
            for (const auto& [opt, key] : run_opts)
                if (opt->count() > 0) cli_values[key] = run_values[key];
            const auto file_values =
                config_path.empty() ? std::map<std::string, std::string>{} : read_config_file(config_path);
            config = resolve_run_config(file_values, cli_values);
        } catch (...) {
            return report_error(std::current_exception(), std::cerr);
        }
        return cmd_run(config, std::cout, std::cerr);
    }
    if (table3->parsed()) {
        t3.data_path = opt_path(t3_data);
        t3.output_path = opt_path(t3_out);
        t3.sampler = t3_sampler.config();
        return cmd_reproduce_table3(t3, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
        try {
            sw.mode = parse_sweep_mode(sw_mode);
        } catch (...) {
            return report_error(std::current_exception(), std::cerr);
        }
        sw.data_path = opt_path(sw_data);
        sw.output_path = opt_path(sw_out);
        sw.sampler = sw_sampler.config();
        return cmd_sweep_tau(sw, std::cout, std::cerr);
    }
    return cmd_ttest(opt_path(tt_data), std::cout, std::cerr);
}
