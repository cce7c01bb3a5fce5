#include "voc/power_meter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace voc {

PowerMeter::PowerMeter(double omega_nominal)
    : omega_nominal_(omega_nominal), omega_hat_(omega_nominal) {
    if (!(omega_nominal > 0.0)) {
        throw std::invalid_argument("power meter needs a positive nominal frequency");
    }
}

double PowerMeter::window() const { return 2.0 * std::numbers::pi / omega_hat_; }

double PowerMeter::interpolate_v(double t) const {
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const Sample& s, double x) { return s.t < x; });
    if (it == samples_.begin()) return it->v;
    if (it == samples_.end()) return samples_.back().v;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return lo.v + w * (hi.v - lo.v);
}

double PowerMeter::cumulative_at(double t, bool reactive) const {
    auto value = [reactive](const Sample& s) { return reactive ? s.cum_q : s.cum_p; };
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const Sample& s, double x) { return s.t < x; });
    if (it == samples_.begin()) return value(*it);
    if (it == samples_.end()) return value(samples_.back());
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return value(lo) + w * (value(hi) - value(lo));
}

void PowerMeter::push(double t, double v, double i, double omega) {
    if (!samples_.empty() && !(t > samples_.back().t)) {
        throw std::invalid_argument("power meter samples must have increasing time");
    }
    const double t_nominal = 2.0 * std::numbers::pi / omega_nominal_;
    if (samples_.empty()) {
        t_first_ = t;
        omega_hat_ = omega > 0.0 ? omega : omega_nominal_;
    } else {
        const double dt = t - samples_.back().t;
        const double a = 1.0 - std::exp(-dt / t_nominal);
        omega_hat_ += a * (omega - omega_hat_);
    }
    const double T = window();

    Sample s{t, v, v * i, 0.0, 0.0, 0.0, false};
    const double t_delayed = t - 0.25 * T;
    if (!samples_.empty() && t_delayed >= t_first_) {
        s.q = interpolate_v(t_delayed) * i;
        s.q_valid = true;
        if (!q_started_) {
            q_started_ = true;
            t_q_valid_ = t;
        }
    }
    if (!samples_.empty()) {
        const auto& prev = samples_.back();
        const double dt = t - prev.t;
        s.cum_p = prev.cum_p + 0.5 * (prev.p + s.p) * dt;
        s.cum_q = prev.cum_q + (prev.q_valid ? 0.5 * (prev.q + s.q) * dt : 0.0);
    }
    samples_.push_back(s);

    // Keep 1.5 windows of history: enough for the averaging window plus the T/4 delay.
    const double keep = 1.5 * std::max(T, t_nominal);
    while (samples_.size() > 2 && samples_[1].t < t - keep) {
        samples_.pop_front();
    }
}

bool PowerMeter::ready() const {
    if (samples_.empty() || !q_started_) return false;
    const double t = samples_.back().t;
    return t - window() >= t_q_valid_;
}

std::optional<PowerPair> PowerMeter::average() const {
    if (!ready()) return std::nullopt;
    const double t = samples_.back().t;
    const double T = window();
    const double t0 = t - T;
    return PowerPair{(samples_.back().cum_p - cumulative_at(t0, false)) / T,
                     (samples_.back().cum_q - cumulative_at(t0, true)) / T};
}

std::optional<PowerPair> measure_power(PowerMeter& meter, double t, double v, double i,
                                       double omega) {
    meter.push(t, v, i, omega);
    return meter.average();
}

}  // namespace voc
