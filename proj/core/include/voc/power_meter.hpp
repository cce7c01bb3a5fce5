#pragma once

#include <deque>
#include <optional>

#include "voc/phasor.hpp"

namespace voc {

/// Single-phase cycle-averaged power measurement.
///
/// P is the moving average of v(t) i(t) and Q the moving average of v(t - T/4) i(t),
/// both over one window T = 2 pi / omega_hat. omega_hat is a first-order smoothed
/// (one nominal cycle) version of the frequency supplied with each sample, so the
/// window follows the recovered oscillator frequency.
class PowerMeter {
public:
    explicit PowerMeter(double omega_nominal);

    /// Adds a sample. Time must be strictly increasing.
    void push(double t, double v, double i, double omega);

    /// Cycle averages, or nullopt until one full window (plus the quarter-period
    /// delay line) has been observed.
    std::optional<PowerPair> average() const;

    bool ready() const;
    double omega_hat() const { return omega_hat_; }
    double window() const;

private:
    struct Sample {
        double t;
        double v;
        double p;      // v i
        double q;      // v(t - T/4) i
        double cum_p;  // running trapezoidal integrals
        double cum_q;
        bool q_valid;
    };

    double interpolate_v(double t) const;
    double cumulative_at(double t, bool reactive) const;

    double omega_nominal_;
    double omega_hat_;
    std::deque<Sample> samples_;
    double t_first_ = 0.0;
    double t_q_valid_ = 0.0;  // first instant at which q could be formed
    bool q_started_ = false;
};

/// Pushes one sample and returns the current averages (nullopt before warm-up).
std::optional<PowerPair> measure_power(PowerMeter& meter, double t, double v, double i,
                                       double omega);

}  // namespace voc
