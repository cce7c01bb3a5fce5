#include "voc/averaged.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "voc/errors.hpp"

namespace voc {

double beta(const VocParams& p) { return 3.0 * p.alpha / (p.k_v * p.k_v * p.sigma); }

double sigma_beta(const VocParams& p, const ImpedanceConstants& k) {
    return p.sigma - p.k_v * p.k_i * k.C_beta;
}

AveragedRates averaged_derivatives(const AveragedState& s, PowerPair power, const VocParams& p,
                                   const ImpedanceConstants& k, double omega) {
    const double V = s.V_bar;
    if (!(V > kAveragedFloor)) {
        throw OscillatorCollapse(
            "averaged amplitude " + std::to_string(V) + " V reached the collapse floor", V);
    }
    const double gain = p.k_v * p.k_i / (2.0 * p.C);
    const double dV = p.sigma / (2.0 * p.C) * (V - 0.5 * beta(p) * V * V * V) -
                      gain * (k.C_alpha * power.P / V + k.S_alpha * power.Q / V + k.C_beta * V);
    const double V2 = V * V;
    const double dtheta = p.omega_star() - omega +
                          gain * (k.C_alpha * power.Q / V2 - k.S_alpha * power.P / V2 - k.S_beta);
    return {dV, dtheta};
}

EquilibriumResult equilibrium_voltage(PowerPair power, const VocParams& p,
                                      const ImpedanceConstants& k) {
    if (!(p.k_v > 0.0) || !(p.k_i > 0.0)) {
        throw std::invalid_argument("equilibrium_voltage requires k_v > 0 and k_i > 0");
    }
    EquilibriumResult r;
    const double sb = sigma_beta(p, k);
    const double ratio = p.k_i / p.k_v;
    r.S_cr = sb * sb / (6.0 * p.alpha * ratio);
    r.V_cr = p.k_v * std::sqrt(sb / (3.0 * p.alpha));
    r.V_oc = p.k_v * std::sqrt(2.0 * sb / (3.0 * p.alpha));

    const double loading = k.C_alpha * power.P + k.S_alpha * power.Q;
    const double disc = sb * sb - 6.0 * p.alpha * ratio * loading;
    r.exists = loading < r.S_cr && disc >= 0.0;
    if (!r.exists) {
        r.V_high = r.V_low = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double root = std::sqrt(disc);
    r.V_high = p.k_v * std::sqrt((sb + root) / (3.0 * p.alpha));
    // Negative loading (absorbed power) leaves only the high root physical.
    const double low_sq = (sb - root) / (3.0 * p.alpha);
    r.V_low = low_sq >= 0.0 ? p.k_v * std::sqrt(low_sq) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

double equilibrium_frequency(PowerPair power, double V_eq, const VocParams& p,
                             const ImpedanceConstants& k) {
    if (!(V_eq > 0.0)) {
        throw std::invalid_argument("equilibrium_frequency requires V_eq > 0");
    }
    const double V2 = V_eq * V_eq;
    return p.omega_star() + p.k_v * p.k_i / (2.0 * p.C) *
                                (k.C_alpha * power.Q / V2 - k.S_alpha * power.P / V2 - k.S_beta);
}

double rise_time(const VocParams& p, const ImpedanceConstants& k) {
    return 6.0 / (p.omega_star() * p.epsilon() * sigma_beta(p, k));
}

double harmonic_ratio(const VocParams& p) { return p.epsilon() * p.sigma / 8.0; }

ImpedanceConstants legacy_constants() {
    return ImpedanceConstants::from_complex({1.0, 0.0}, {0.0, 0.0});
}

}  // namespace voc
