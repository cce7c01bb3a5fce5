#pragma once

#include "voc/oscillator.hpp"
#include "voc/phasor.hpp"

namespace voc {

struct AveragedState {
    double V_bar = 0.0;      // volt RMS
    double theta_bar = 0.0;  // rad, offset with respect to omega t
};

struct AveragedRates {
    double dV = 0.0;
    double dtheta = 0.0;
};

/// Amplitude floor for the averaged model; the phase equation divides by V^2.
inline constexpr double kAveragedFloor = 1.0;

/// beta = 3 alpha / (k_v^2 sigma).
double beta(const VocParams& p);

/// sigma_beta = sigma - k_v k_i C_beta.
double sigma_beta(const VocParams& p, const ImpedanceConstants& k);

/// Averaged amplitude/phase dynamics for current feedback taken after the LCL filter.
///
///   dV/dt     = sigma/(2C) (V - beta/2 V^3) - k_v k_i/(2C) (C_a P/V + S_a Q/V + C_b V)
///   dtheta/dt = omega* - omega + k_v k_i/(2C) (C_a Q/V^2 - S_a P/V^2 - S_b)
///
/// P, Q are the inverter output power V conj(I_f). With legacy_constants() the
/// expressions reduce to the model for feedback taken before the filter.
/// Throws OscillatorCollapse when V_bar <= kAveragedFloor.
AveragedRates averaged_derivatives(const AveragedState& s, PowerPair power, const VocParams& p,
                                   const ImpedanceConstants& k, double omega);

struct EquilibriumResult {
    double V_high = 0.0;
    double V_low = 0.0;
    bool exists = false;
    double S_cr = 0.0;  // critical value of C_a P + S_a Q
    double V_cr = 0.0;
    double V_oc = 0.0;
};

/// Both amplitude equilibria for the given steady-state power. When the loading
/// C_a P + S_a Q reaches S_cr no real root exists and V_high/V_low are NaN.
EquilibriumResult equilibrium_voltage(PowerPair power, const VocParams& p,
                                      const ImpedanceConstants& k);

/// Steady-state frequency for the given power and amplitude (high root).
double equilibrium_frequency(PowerPair power, double V_eq, const VocParams& p,
                             const ImpedanceConstants& k);

/// Unloaded 10%-90% build-up time estimate 6 / (omega* epsilon sigma_beta).
double rise_time(const VocParams& p, const ImpedanceConstants& k);

/// Third-to-first harmonic ratio estimate epsilon sigma / 8.
double harmonic_ratio(const VocParams& p);

/// C_alpha = 1, all others 0: the model without filter capacitance effects.
ImpedanceConstants legacy_constants();

}  // namespace voc
