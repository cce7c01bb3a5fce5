#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voc/design.hpp"
#include "voc/dispatch.hpp"
#include "voc/scenario.hpp"
#include "voc/simulation.hpp"

namespace voc {

inline constexpr int kSchemaVersion = 1;

/// Per-inverter overrides; anything absent falls back to the document-level design.
struct InverterDocument {
    std::optional<VocParams> params;
    std::optional<LclFilter> filter;
    std::optional<SeriesRlBranch> line;
    double V0 = std::numeric_limits<double>::quiet_NaN();
    double theta0 = 0.0;
};

/// Parsed scenario document (JSON, SI units, unit suffixes in key names).
/// Sections that are absent take the values of the 750 W reference system.
struct ScenarioDocument {
    std::string name = "scenario";
    AcSpec spec;
    LclFilter filter;
    SeriesRlBranch line;
    SmaxMode mode = SmaxMode::rated_point;
    CapacitanceRule c_rule = CapacitanceRule::max;
    double epsilon_scale = 1.0;
    std::vector<InverterDocument> inverters;
    std::vector<LoadSetup> loads;
    Model model = Model::averaged;
    double duration_s = 1.0;
    double dt_s = 0.0;
    double trace_interval_s = kDefaultTraceInterval;
    FeedbackTap feedback_tap = FeedbackTap::after_filter;
    double harmonic_window_s = 0.2;
    double comparison_window_start_s = 0.0;
    std::optional<DispatchSetup> dispatch;
};

/// Throws ConfigError with the line (syntax) or the JSON pointer of the offending field.
ScenarioDocument parse_scenario_document(const std::string& text,
                                         const std::string& source = "<scenario>");
ScenarioDocument load_scenario_document(const std::string& path);

/// Document describing the reference dispatch system.
ScenarioDocument reference_document();

/// Design report for the document's AC ratings and filter.
DesignReport design_for(const ScenarioDocument& doc);

/// Runnable scenario: designed parameters (scaled by epsilon_scale) unless overridden.
Scenario build_scenario(const ScenarioDocument& doc);

/// Two-inverter dispatch system using the loads connected at t = 0.
DispatchSystem build_dispatch_system(const ScenarioDocument& doc);

std::string design_report_json(const DesignReport& r);
std::string run_report_json(const RunReport& r);
std::string dispatch_equilibrium_json(PowerPair setpoint, const DispatchEquilibrium& eq);

SmaxMode parse_smax_mode(const std::string& text);
CapacitanceRule parse_capacitance_rule(const std::string& text);

}  // namespace voc
