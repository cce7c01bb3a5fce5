#include "voc/reference.hpp"

#include <numbers>

namespace voc::reference {

double omega_star() { return 2.0 * std::numbers::pi * 60.0; }

AcSpec ac_spec() {
    AcSpec s;
    s.V_oc = 126.0;
    s.V_min = 114.0;
    s.P_rated = 750.0;
    s.Q_rated = 750.0;
    s.omega_star = omega_star();
    s.d_omega_max = 2.0 * std::numbers::pi * 0.5;
    s.t_rise_max = 0.2;
    s.delta31_max = 0.01;
    return s;
}

LclFilter filter() { return {0.15, 2.48e-3, 3.3, 4.7e-6, 0.13, 0.97e-3}; }

SeriesRlBranch line() { return {0.15, 2.48e-3, "line"}; }

InverterBranch inverter_branch() { return {filter(), line()}; }

SeriesRlBranch load() { return {22.1, 14.4e-3, "z_L"}; }

PiGains pi_gains() { return {-0.001, -0.15, 0.0001, 0.01}; }

std::vector<Setpoint> dispatch_schedule() {
    return {{500.0, 83.0, 5.0},
            {500.0, 120.0, 15.0},
            {500.0, 50.0, 25.0},
            {100.0, 50.0, 35.0},
            {100.0, 120.0, 55.0}};
}

DesignReport design_report() {
    return design(ac_spec(), filter(), SmaxMode::rated_point, CapacitanceRule::max);
}

VocParams parameters() { return design_report().params; }

DispatchSystem dispatch_system() {
    return DispatchSystem::symmetric(parameters(), inverter_branch(), {load()}, omega_star());
}

Scenario rise_time_scenario() {
    Scenario s;
    s.name = "rise_time";
    s.model = Model::actual;
    s.duration_s = 1.0;
    InverterSetup inv{parameters(), inverter_branch()};
    inv.V0 = 1.0;
    s.inverters = {inv};
    s.harmonic_window_s = 0.25;
    return s;
}

LclFilter comparison_filter() {
    LclFilter f = filter();
    f.L_f *= 10.0;
    f.C_f *= 19.75;
    return f;
}

VocParams comparison_parameters() {
    // The enlarged filter leaves the capacitance window empty; the upper bound is kept.
    const auto r = design(ac_spec(), comparison_filter(), SmaxMode::rated_point,
                          CapacitanceRule::max);
    return r.params.with_epsilon_scaled(1.0 / 8.0);
}

Scenario comparison_scenario(Model model) {
    Scenario s;
    s.name = "model_comparison";
    s.model = model;
    s.duration_s = 10.0;
    const InverterBranch branch{comparison_filter(), line()};
    const VocParams p = comparison_parameters();
    s.inverters = {InverterSetup{p, branch}, InverterSetup{p, branch}};
    const double w = omega_star();
    s.loads = {LoadSetup{{6.9, 16.6 / w, "z_L"}},
               LoadSetup{{44.24, 10.85 / w, "z_S"}, 4.0, 7.0}};
    return s;
}

Scenario dispatch_scenario(Model model) {
    Scenario s;
    s.name = "dispatch";
    s.model = model;
    s.duration_s = kDispatchDuration;
    const VocParams p = parameters();
    s.inverters = {InverterSetup{p, inverter_branch()}, InverterSetup{p, inverter_branch()}};
    s.loads = {LoadSetup{load()}};
    DispatchSetup d;
    d.schedule = dispatch_schedule();
    d.gains = pi_gains();
    s.dispatch = d;
    return s;
}

}  // namespace voc::reference
