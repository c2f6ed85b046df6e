#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ibf/diagnostics.hpp"
#include "ibf/inference.hpp"
#include "ibf/oracle.hpp"

namespace ibf {

inline constexpr std::string_view report_schema_version = "ibf.inference_report/1";

/// Run metadata that the inference layer does not know about.
struct ReportContext {
    std::string model;
    double tau = 0.0;
    std::string eta1_mode = "value";
    std::uint64_t seed = 0;
    std::optional<Diagnostics> diagnostics;
};

/// Non-finite numbers serialize as null.
nlohmann::json to_json(const InferenceReport& report, const ReportContext& context);
nlohmann::json to_json(const Diagnostics& diagnostics);
nlohmann::json to_json(const OracleResult& oracle);

/// Human-readable summary table.
std::string format_report(const InferenceReport& report, const ReportContext& context);

}  // namespace ibf
