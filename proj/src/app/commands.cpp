#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include "ibf/app.hpp"
#include "ibf/errors.hpp"
#include "ibf/oracle.hpp"
#include "ibf/report.hpp"

namespace ibf::app {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (...) {
        return report_error(std::current_exception(), err);
    }
}

std::string num(double v, const char* fmt = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

// Bare file names that do not exist in the working directory are looked up in
// the shipped data directory, so `--data calcium.csv` works from anywhere.
std::filesystem::path resolve_data_path(const std::filesystem::path& p) {
    if (std::filesystem::exists(p) || p.has_parent_path()) return p;
    const auto shipped = default_data_dir() / p;
    return std::filesystem::exists(shipped) ? shipped : p;
}

TwoSampleData load_two_sample(const std::optional<std::filesystem::path>& path, std::string& label) {
    if (path) {
        label = path->string();
        return read_two_sample_csv(resolve_data_path(*path));
    }
    label = "embedded:calcium";
    return calcium_data();
}

MetaAnalysisData load_meta(const std::optional<std::filesystem::path>& path, std::string& label) {
    if (path) {
        label = path->string();
        return read_meta_csv(resolve_data_path(*path));
    }
    label = "embedded:betablocker";
    return betablocker_data();
}

struct Table3Published {
    double delta;
    double p_alt;
    double bf10;
};

constexpr Table3Published table3_published[] = {{0.1, 0.97, 35.6}, {0.2, 0.81, 4.37}, {0.3, 0.29, 0.411}};

}  // namespace

int report_error(std::exception_ptr error, std::ostream& err) {
    try {
        std::rethrow_exception(error);
    } catch (const InitializationError& e) {
        err << "error[sampler]: " << e.what() << '\n';
        return exit_sampler;
    } catch (const DiagnosticsError& e) {
        err << "error[diagnostics]: " << e.what() << '\n';
        return exit_diagnostics;
    } catch (const InputError& e) {
        err << "error[input]: " << e.what() << '\n';
        return exit_input;
    } catch (const DegenerateError& e) {
        err << "error[input]: " << e.what() << '\n';
        return exit_input;
    } catch (const TransformError& e) {
        err << "error[input]: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        err << "error[internal]: " << e.what() << '\n';
        return exit_internal;
    } catch (...) {
        err << "error[internal]: unknown exception\n";
        return exit_internal;
    }
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SamplerConfig sampler = config.sampler();
        sampler.validate();
        const IntervalHypothesis h(config.center, config.delta);
        const double tau = config.tau.resolve(config.delta);
        const double eta1 = config.eta1.resolve(h, tau);

        std::string data_label = "none";
        ModelSpec model;
        switch (config.model) {
            case ModelKind::TwoSample: {
                TwoSampleEffectModelConfig mc;
                mc.delta = config.delta;
                mc.center = config.center;
                mc.tau = tau;
                mc.eta1 = eta1;
                model = build_two_sample_model(load_two_sample(config.data_path, data_label), mc);
                break;
            }
            case ModelKind::Meta: {
                MetaModelConfig mc;
                mc.delta = config.delta;
                mc.center = config.center;
                mc.tau = tau;
                mc.eta1 = eta1;
                model = build_meta_model(load_meta(config.data_path, data_label), mc);
                break;
            }
            case ModelKind::Toy:
                data_label = "y_obs=" + num(config.y_obs);
                model = build_toy_model(config.y_obs, h, tau, eta1);
                break;
        }

        const DrawMatrix draws = run_chains(model, sampler);
        const Diagnostics diagnostics = diagnose(draws);
        const InferenceReport report =
            full_report(draws.by_chain(draws.index_of("theta")), h, eta1, config.alpha);

        ReportContext ctx{to_string(config.model), tau, config.eta1.label(), config.seed, diagnostics};
        nlohmann::json json = to_json(report, ctx);
        json["data"] = data_label;
        json["sampler"] = {{"chains", sampler.chains},
                           {"warmup", sampler.warmup_iterations},
                           {"draws", sampler.sampling_iterations}};
        if (config.model == ModelKind::Toy)
            json["oracle"] = to_json(toy_model_oracle(config.y_obs, h, tau, eta1));

        out << format_report(report, ctx);
        if (diagnostics.max_split_rhat() > rhat_failure_threshold) {
            err << "error[diagnostics]: max split R-hat " << num(diagnostics.max_split_rhat(), "%.4f")
                << " exceeds " << rhat_failure_threshold << "; no report written\n";
            return static_cast<int>(exit_diagnostics);
        }
        if (config.draws_path) {
            std::ostringstream csv;
            write_draws_csv(csv, draws);
            write_file_atomically(*config.draws_path, csv.str());
        }
        if (config.output_path)
            write_file_atomically(*config.output_path, json.dump(2) + "\n");
        else
            out << json.dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

std::vector<Table3Row> reproduce_table3(const MetaAnalysisData& data, const SamplerConfig& sampler) {
    std::vector<Table3Row> rows;
    for (const auto& pub : table3_published) {
        MetaModelConfig mc;
        mc.delta = pub.delta;
        mc.tau = 1.5 * pub.delta;
        mc.eta1 = 0.5;
        const auto draws = run_chains(build_meta_model(data, mc), sampler);
        Table3Row row;
        row.delta = pub.delta;
        row.tau = mc.tau;
        row.published_p_alt = pub.p_alt;
        row.published_bf10 = pub.bf10;
        row.diagnostics = diagnose(draws);
        row.report = full_report(draws.by_chain(draws.index_of("theta")), mc.hypothesis(), mc.eta1);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::json table3_to_json(const std::vector<Table3Row>& rows, const SamplerConfig& sampler) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        ReportContext ctx{"meta", r.tau, "half", sampler.seed, r.diagnostics};
        arr.push_back({{"delta", r.delta},
                       {"published", {{"p_alt", r.published_p_alt}, {"bf10", r.published_bf10}}},
                       {"computed", to_json(r.report, ctx)}});
    }
    return {{"table", "bayes_factors_by_delta"},
            {"sampler",
             {{"chains", sampler.chains},
              {"warmup", sampler.warmup_iterations},
              {"draws", sampler.sampling_iterations},
              {"seed", sampler.seed}}},
            {"rows", arr}};
}

std::string format_table3(const std::vector<Table3Row>& rows) {
    std::ostringstream os;
    os << "delta   tau    | published p_alt  BF10   | computed p_alt (se)      BF10 (se)          | R-hat\n";
    for (const auto& r : rows) {
        const auto& bf = r.report.bayes_factor;
        char line[256];
        std::snprintf(line, sizeof line,
                      "%-6.2f  %-5.3f  | %-15.2f  %-6.4g | %.4f (%.4f)          %-8.4g (%-7.3g) | %.4f\n", r.delta,
                      r.tau, r.published_p_alt, r.published_bf10, r.report.mass.p_alt, r.report.mass.standard_error,
                      bf.bf10, bf.standard_error(), r.diagnostics.max_split_rhat());
        os << line;
    }
    return os.str();
}

int cmd_reproduce_table3(const Table3Options& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        options.sampler.validate();
        std::string label;
        const auto data = load_meta(options.data_path, label);
        const auto rows = reproduce_table3(data, options.sampler);
        auto json = table3_to_json(rows, options.sampler);
        json["data"] = label;
        out << format_table3(rows);
        double worst = 1.0;
        for (const auto& r : rows) worst = std::max(worst, r.diagnostics.max_split_rhat());
        if (worst > rhat_failure_threshold) {
            err << "error[diagnostics]: max split R-hat " << num(worst, "%.4f") << " exceeds "
                << rhat_failure_threshold << "; no report written\n";
            return static_cast<int>(exit_diagnostics);
        }
        if (options.output_path)
            write_file_atomically(*options.output_path, json.dump(2) + "\n");
        else
            out << json.dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

SweepEta1Mode parse_sweep_mode(const std::string& s) {
    if (s == "half") return SweepEta1Mode::Half;
    if (s == "continuity") return SweepEta1Mode::Continuity;
    if (s == "both") return SweepEta1Mode::Both;
    throw InputError("eta1 mode must be half, continuity or both (got '" + s + "')");
}

std::vector<SweepRow> sweep_tau(const TwoSampleData& data, double delta, const std::vector<double>& tau_grid,
                                SweepEta1Mode mode, const SamplerConfig& sampler) {
    if (tau_grid.empty()) throw InputError("tau grid is empty");
    std::vector<Eta1Spec> specs;
    if (mode != SweepEta1Mode::Continuity) specs.push_back({Eta1Spec::Mode::Half, 0.5});
    if (mode != SweepEta1Mode::Half) specs.push_back({Eta1Spec::Mode::Continuity, 0.0});

    std::vector<SweepRow> rows;
    for (double tau : tau_grid) {
        for (const auto& spec : specs) {
            TwoSampleEffectModelConfig mc;
            mc.delta = delta;
            mc.tau = tau;
            mc.eta1 = spec.resolve(mc.hypothesis(), tau);
            const auto draws = run_chains(build_two_sample_model(data, mc), sampler);
            const auto mass = posterior_mass(draws.by_chain(draws.index_of("theta")), mc.hypothesis());
            const auto bf = bayes_factor(mass, mc.eta1);
            SweepRow row;
            row.tau = tau;
            row.eta1_mode = spec.label();
            row.eta1 = mc.eta1;
            row.p_alt = mass.p_alt;
            row.p_alt_se = mass.standard_error;
            row.bf10 = bf.bf10;
            row.bf10_se = bf.standard_error();
            row.log10_bf10_se = bf.mc_standard_error_log10;
            row.max_split_rhat = draws.chains() >= 2 && draws.iterations() >= 100
                                     ? diagnose(draws).max_split_rhat()
                                     : std::nan("");
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "tau,eta1_mode,eta1,p_alt,p_alt_se,bf10,bf10_se,log10_bf10_se,max_split_rhat\n";
    for (const auto& r : rows) {
        out << num(r.tau) << ',' << r.eta1_mode << ',' << num(r.eta1) << ',' << num(r.p_alt) << ','
            << num(r.p_alt_se) << ',' << num(r.bf10) << ',' << num(r.bf10_se) << ',' << num(r.log10_bf10_se)
            << ',' << num(r.max_split_rhat) << '\n';
    }
}

int cmd_sweep_tau(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        options.sampler.validate();
        if (!(options.delta > 0.0)) throw InputError("delta must be positive");
        std::string label;
        const auto data = load_two_sample(options.data_path, label);
        const auto rows = sweep_tau(data, options.delta, options.tau_grid, options.mode, options.sampler);
        std::ostringstream csv;
        write_sweep_csv(csv, rows);
        if (options.output_path)
            write_file_atomically(*options.output_path, csv.str());
        else
            out << csv.str();
        return static_cast<int>(exit_ok);
    });
}

int cmd_ttest(const std::optional<std::filesystem::path>& data_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::string label;
        const auto data = load_two_sample(data_path, label);
        const auto r = pooled_t_test(data);
        const nlohmann::json j = {{"data", label}, {"t", r.t}, {"p_value", r.p_value}, {"df", r.df}};
        out << j.dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

}  // namespace ibf::app
