#include "voc/oscillator.hpp"

#include <stdexcept>
#include <string>

#include "voc/errors.hpp"

namespace voc {

VocParams VocParams::from_capacitance(double sigma, double alpha, double C, double k_v,
                                      double k_i, double omega_star) {
    VocParams p;
    p.sigma = sigma;
    p.alpha = alpha;
    p.C = C;
    p.L = 1.0 / (C * omega_star * omega_star);
    p.k_v = k_v;
    p.k_i = k_i;
    return p;
}

VocParams VocParams::with_epsilon_scaled(double factor) const {
    VocParams p = *this;
    p.C = C / factor;
    p.L = L * factor;
    return p;
}

void VocParams::validate() const {
    if (!(sigma > 0.0) || !(alpha > 0.0) || !(L > 0.0) || !(C > 0.0) || !(k_v > 0.0) ||
        !(k_i > 0.0)) {
        throw std::invalid_argument(
            "oscillator parameters sigma, alpha, L, C, k_v, k_i must all be positive");
    }
}

double g_nonlinearity(double u, const VocParams& p) {
    return u - (p.alpha / (p.sigma * p.k_v * p.k_v)) * u * u * u;
}

OscRates voc_derivatives(const OscState& s, double i_fb, const VocParams& p) {
    if (!(s.V >= kOscillatorFloor)) {
        throw OscillatorCollapse(
            "oscillator amplitude " + std::to_string(s.V) + " V fell below the collapse floor",
            s.V);
    }
    const double w = p.omega_star();
    const double gain = p.epsilon() * w / std::sqrt(2.0);
    const double c = std::cos(s.phi);
    const double h = p.sigma * g_nonlinearity(std::sqrt(2.0) * s.V * c, p) - p.k_v * p.k_i * i_fb;
    return {gain * h * c, w - gain / s.V * h * std::sin(s.phi)};
}

}  // namespace voc
