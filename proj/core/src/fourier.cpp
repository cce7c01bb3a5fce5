#include "voc/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace voc {

std::vector<double> fourier_components(std::span<const double> t, std::span<const double> v,
                                       double fundamental_hz, std::span<const int> orders,
                                       int min_cycles) {
    if (t.size() != v.size() || t.size() < 2) {
        throw std::invalid_argument("fourier_components needs matching sample arrays");
    }
    if (!(fundamental_hz > 0.0)) {
        throw std::invalid_argument("fourier_components needs a positive fundamental");
    }
    const double period = 1.0 / fundamental_hz;
    const double span = t.back() - t.front();
    const int cycles = static_cast<int>(std::floor(span / period + 1e-9));
    if (cycles < min_cycles) {
        throw std::invalid_argument("fourier_components: window holds fewer than " +
                                    std::to_string(min_cycles) + " cycles");
    }
    const double b = t.back();
    const double a = b - cycles * period;
    // first sample strictly after a
    const auto first = static_cast<std::size_t>(
        std::upper_bound(t.begin(), t.end(), a) - t.begin());
    const double w = 2.0 * std::numbers::pi * fundamental_hz;

    std::vector<double> out;
    out.reserve(orders.size());
    for (int h : orders) {
        const double wh = w * h;
        auto fc = [&](double tt, double vv) { return vv * std::cos(wh * (tt - a)); };
        auto fs = [&](double tt, double vv) { return vv * std::sin(wh * (tt - a)); };
        double sc = 0.0, ss = 0.0;
        // partial interval [a, t[first]] with v interpolated at a
        double t0 = a, v0 = v[first];
        if (first > 0) {
            const double f = (a - t[first - 1]) / (t[first] - t[first - 1]);
            v0 = v[first - 1] + f * (v[first] - v[first - 1]);
        }
        for (std::size_t i = first; i < t.size(); ++i) {
            const double h_i = t[i] - t0;
            sc += 0.5 * h_i * (fc(t0, v0) + fc(t[i], v[i]));
            ss += 0.5 * h_i * (fs(t0, v0) + fs(t[i], v[i]));
            t0 = t[i];
            v0 = v[i];
        }
        const double T = b - a;
        out.push_back(2.0 / T * std::hypot(sc, ss));
    }
    return out;
}

double estimate_fundamental(std::span<const double> t, std::span<const double> v) {
    double first = 0.0, last = 0.0;
    int n = 0;
    for (std::size_t i = 1; i < t.size() && i < v.size(); ++i) {
        if (v[i - 1] < 0.0 && v[i] >= 0.0) {
            const double tc = t[i - 1] + (t[i] - t[i - 1]) * (-v[i - 1]) / (v[i] - v[i - 1]);
            if (n == 0) first = tc;
            last = tc;
            ++n;
        }
    }
    if (n < 2) {
        throw std::invalid_argument("estimate_fundamental: fewer than two zero crossings");
    }
    return (n - 1) / (last - first);
}

}  // namespace voc
