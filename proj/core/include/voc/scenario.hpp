#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "voc/dispatch.hpp"
#include "voc/oscillator.hpp"
#include "voc/phasor.hpp"

namespace voc {

enum class Model { actual, averaged, legacy };

/// Which current drives the oscillator in the actual model.
enum class FeedbackTap { after_filter, before_filter };

inline constexpr double kDefaultEmtStep = 5e-6;
inline constexpr double kDefaultAveragedStep = 5e-4;
inline constexpr double kDefaultTraceInterval = 1e-3;

double default_step(Model model);

struct InverterSetup {
    VocParams params;
    InverterBranch branch;
    /// Initial RMS amplitude; NaN selects the unloaded equilibrium of the model.
    double V0 = std::numeric_limits<double>::quiet_NaN();
    double theta0 = 0.0;
};

/// Load branch with its breaker schedule. A branch is connected on [connect_s, disconnect_s).
struct LoadSetup {
    SeriesRlBranch branch;
    double connect_s = 0.0;
    double disconnect_s = std::numeric_limits<double>::infinity();
};

/// Power dispatch of inverter 1. Before the first setpoint the controller is idle and
/// inverter 1 runs at its design gains.
struct DispatchSetup {
    std::vector<Setpoint> schedule;
    PiGains gains;
    double clamp_low = 0.2;   // fraction of the design gains
    double clamp_high = 3.0;
};

struct Scenario {
    std::string name = "scenario";
    Model model = Model::averaged;
    double duration_s = 1.0;
    double dt_s = 0.0;  // 0 selects default_step(model)
    double trace_interval_s = kDefaultTraceInterval;
    std::vector<InverterSetup> inverters;
    std::vector<LoadSetup> loads;
    std::optional<DispatchSetup> dispatch;
    FeedbackTap feedback_tap = FeedbackTap::after_filter;
    /// Length of the terminal-voltage record kept for harmonic analysis (actual model).
    double harmonic_window_s = 0.2;

    double step() const { return dt_s > 0.0 ? dt_s : default_step(model); }

    /// 0, every event and setpoint time inside (0, duration), and duration; sorted, unique.
    std::vector<double> segment_boundaries() const;

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;
};

const char* to_string(Model model);
Model parse_model(const std::string& text);

}  // namespace voc
