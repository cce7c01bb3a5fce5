#pragma once

#include <vector>

#include "voc/design.hpp"
#include "voc/dispatch.hpp"
#include "voc/scenario.hpp"

/// The two-inverter laboratory system used throughout the examples and tests:
/// 750 W / 750 var inverters at 126 V open circuit and 60 Hz.
namespace voc::reference {

double omega_star();
AcSpec ac_spec();
LclFilter filter();
SeriesRlBranch line();
InverterBranch inverter_branch();
SeriesRlBranch load();
PiGains pi_gains();

/// Published dispatch schedule for inverter 1 (controller idle before the first entry).
std::vector<Setpoint> dispatch_schedule();
inline constexpr double kDispatchDuration = 65.0;

/// Parameters designed for the system (rated_point, C = upper bound).
DesignReport design_report();
VocParams parameters();

DispatchSystem dispatch_system();

/// Unloaded single inverter starting from a 1 V amplitude.
Scenario rise_time_scenario();

/// Two inverters with enlarged filters (L_f x10, C_f x19.75) and epsilon / 8, feeding
/// z_L with z_S switched in parallel at 4 s and out at 7 s.
LclFilter comparison_filter();
VocParams comparison_parameters();
Scenario comparison_scenario(Model model);
inline constexpr double kComparisonWindowStart = 3.0;

/// Dispatch schedule on the base system.
Scenario dispatch_scenario(Model model);

}  // namespace voc::reference
