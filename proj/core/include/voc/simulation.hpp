#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "voc/scenario.hpp"

namespace voc {

struct InverterSample {
    double V_rms = 0.0;
    double theta = 0.0;    // rad, phase offset with respect to omega* t
    double freq_hz = 0.0;
    double P = 0.0;        // output power V conj(I_f); NaN before the meter is ready
    double Q = 0.0;
    double k_v = 0.0;
    double k_i = 0.0;
};

struct TraceRow {
    double t = 0.0;
    std::vector<InverterSample> inverters;
    double load_P = 0.0;
    double load_Q = 0.0;
    double margin = 0.0;  // security margin of the active setpoint, NaN when idle
};

/// Averages over the tail of one segment between consecutive events.
struct SegmentSummary {
    double t_begin = 0.0;
    double t_end = 0.0;
    double window_begin = 0.0;
    std::vector<InverterSample> mean;
    double load_P = 0.0;
    double load_Q = 0.0;
    double margin_min = 0.0;  // NaN without dispatch
    std::optional<Setpoint> setpoint;
    /// |sum P_k - load P - losses| / load P at the segment end (averaged models only).
    double balance_residual = 0.0;
};

struct RunReport {
    Model model = Model::averaged;
    double dt = 0.0;
    std::size_t steps = 0;
    /// 10%-90% build-up time of inverter 1 against its final amplitude; NaN when the
    /// run does not start below 10% of it.
    double rise_time_s = 0.0;
    double V_final = 0.0;
    /// Terminal-voltage harmonics of inverter 1 over the final window (actual model).
    double fundamental_hz = 0.0;
    double harmonic_1 = 0.0;  // peak volt
    double harmonic_3 = 0.0;
    double harmonic_ratio = 0.0;
    /// Largest PCC current-balance residual, excluding 5 ms after breaker events.
    double kcl_residual_max = 0.0;
    double margin_min = 0.0;
    std::vector<SegmentSummary> segments;
};

struct RunResult {
    std::vector<TraceRow> trace;
    RunReport report;
};

/// Runs the scenario to completion. Deterministic.
/// Throws SimulationAborted (with the simulated time) on collapse, non-finite states
/// or singular network solves.
RunResult run(const Scenario& scenario);

}  // namespace voc
