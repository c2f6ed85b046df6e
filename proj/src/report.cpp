#include "ibf/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ibf {

namespace {

nlohmann::json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string general(double v) {
    if (!std::isfinite(v)) return fixed(v, 0);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

}  // namespace

nlohmann::json to_json(const InferenceReport& r, const ReportContext& ctx) {
    const auto& bf = r.bayes_factor;
    nlohmann::json j;
    j["schema_version"] = report_schema_version;
    j["model"] = ctx.model;
    j["center"] = r.hypothesis.center();
    j["delta"] = r.hypothesis.half_width();
    j["tau"] = number(ctx.tau);
    j["eta1"] = bf.eta1_used;
    j["eta1_mode"] = ctx.eta1_mode;
    j["alpha"] = r.alpha;
    j["n_draws"] = r.mass.n_draws;
    j["ess_indicator"] = number(r.mass.n_effective);
    j["p_alt"] = r.mass.p_alt;
    j["p_alt_se"] = number(r.mass.standard_error);
    j["bf10"] = number(bf.bf10);
    j["log10_bf10"] = number(bf.log10_bf10);
    j["log10_bf10_se"] = number(bf.mc_standard_error_log10);
    j["bf10_degeneracy"] = to_string(bf.degeneracy);
    if (bf.degenerate()) {
        j["bf10_bound"] = {{"kind", bf.degeneracy == Degeneracy::NoAlternativeDraws ? "upper" : "lower"},
                           {"value", number(bf.bound)}};
    }
    j["hdi"] = {{"lower", r.hdi.lower},
                {"upper", r.hdi.upper},
                {"level", r.hdi.nominal_level},
                {"contained_count", r.hdi.contained_count},
                {"multimodal", r.hdi.multimodal}};
    j["verdict"] = to_string(r.decision.verdict);
    j["refined_verdict"] = to_string(r.decision.refined_verdict);
    j["p_null"] = r.decision.p_null;
    j["seed"] = ctx.seed;
    if (ctx.diagnostics) j["diagnostics"] = to_json(*ctx.diagnostics);
    return j;
}

nlohmann::json to_json(const Diagnostics& d) {
    nlohmann::json params = nlohmann::json::array();
    for (std::size_t p = 0; p < d.parameter_names.size(); ++p) {
        params.push_back({{"name", d.parameter_names[p]},
                          {"ess", number(d.ess[p])},
                          {"split_rhat", number(d.split_rhat[p])}});
    }
    return {{"max_split_rhat", number(d.max_split_rhat())},
            {"min_ess", number(d.min_ess())},
            {"parameters", params}};
}

nlohmann::json to_json(const OracleResult& o) {
    return {{"marginal_null", number(o.marginal_null)},
            {"marginal_alt", number(o.marginal_alt)},
            {"bf10_exact", number(o.bf10_exact)},
            {"p_alt_exact", number(o.p_alt_exact)},
            {"error_estimate", number(o.error_estimate)},
            {"converged", o.converged},
            {"evaluations", o.evaluations}};
}

std::string format_report(const InferenceReport& r, const ReportContext& ctx) {
    const auto& bf = r.bayes_factor;
    std::ostringstream os;
    os << "model            " << ctx.model << '\n'
       << "hypothesis       |theta - " << general(r.hypothesis.center()) << "| <= "
       << general(r.hypothesis.half_width()) << '\n'
       << "tau              " << general(ctx.tau) << '\n'
       << "eta1             " << fixed(bf.eta1_used, 4) << " (" << ctx.eta1_mode << ")\n"
       << "draws            " << r.mass.n_draws << " (indicator ESS " << fixed(r.mass.n_effective, 0) << ")\n"
       << "Pr(H1 | y)       " << fixed(r.mass.p_alt, 4) << " +/- " << fixed(r.mass.standard_error, 4) << '\n';
    if (bf.degenerate()) {
        os << "BF10             " << (bf.degeneracy == Degeneracy::NoAlternativeDraws ? "< " : "> ")
           << general(bf.bound) << " (no draws in one region)\n";
    } else {
        os << "BF10             " << general(bf.bf10) << " (log10 " << fixed(bf.log10_bf10, 3) << " +/- "
           << fixed(bf.mc_standard_error_log10, 3) << ")\n";
    }
    os << "HDI " << fixed(100.0 * r.hdi.nominal_level, 0) << "%          [" << general(r.hdi.lower) << ", "
       << general(r.hdi.upper) << "]" << (r.hdi.multimodal ? "  (draws look multimodal)" : "") << '\n'
       << "ROPE verdict     " << to_string(r.decision.verdict) << '\n'
       << "refined verdict  " << to_string(r.decision.refined_verdict) << '\n';
    if (ctx.diagnostics) {
        os << "max split R-hat  " << fixed(ctx.diagnostics->max_split_rhat(), 4) << '\n'
           << "min ESS          " << fixed(ctx.diagnostics->min_ess(), 0) << '\n';
    }
    return os.str();
}

}  // namespace ibf
