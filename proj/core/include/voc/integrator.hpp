#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "voc/errors.hpp"

namespace voc {

/// Classical fixed-step fourth-order Runge-Kutta with preallocated stages.
/// The derivative callable has the signature f(t, std::span<const double> x, std::span<double> dx).
class Rk4 {
public:
    explicit Rk4(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n), last_(n) {}

    std::size_t size() const { return k1_.size(); }

    /// Advances x in place from t to t + dt. Throws SimulationAborted (with the state
    /// at t) if the result is not finite.
    template <class F>
    void step(std::span<double> x, double t, double dt, F&& f) {
        const std::size_t n = x.size();
        for (std::size_t i = 0; i < n; ++i) last_[i] = x[i];
        f(t, std::span<const double>(last_), std::span<double>(k1_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = last_[i] + 0.5 * dt * k1_[i];
        f(t + 0.5 * dt, std::span<const double>(tmp_), std::span<double>(k2_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = last_[i] + 0.5 * dt * k2_[i];
        f(t + 0.5 * dt, std::span<const double>(tmp_), std::span<double>(k3_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = last_[i] + dt * k3_[i];
        f(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = last_[i] + dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
            finite = finite && std::isfinite(x[i]);
        }
        if (!finite) {
            for (std::size_t i = 0; i < n; ++i) x[i] = last_[i];
            throw SimulationAborted("non-finite state after integration step at t = " +
                                        std::to_string(t),
                                    t, last_);
        }
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_, last_;
};

/// Value-returning single step for small systems.
template <class F>
std::vector<double> rk4_step(std::vector<double> x, F&& f, double dt, double t = 0.0) {
    Rk4 rk(x.size());
    rk.step(std::span<double>(x), t, dt, std::forward<F>(f));
    return x;
}

}  // namespace voc
