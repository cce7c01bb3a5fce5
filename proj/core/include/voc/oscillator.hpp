#pragma once

#include <cmath>

namespace voc {

/// Virtual oscillator parameters. omega_star and epsilon are derived from L and C
/// so that omega_star = 1/sqrt(LC) holds by construction.
struct VocParams {
    double sigma = 0.0;  // siemens, negative-resistance conductance
    double alpha = 0.0;  // A/V^3, cubic current source coefficient
    double L = 0.0;      // henry
    double C = 0.0;      // farad
    double k_v = 0.0;    // V/V voltage scaling
    double k_i = 0.0;    // A/A current feedback gain

    double omega_star() const { return 1.0 / std::sqrt(L * C); }
    double epsilon() const { return std::sqrt(L / C); }

    /// Builds parameters from C and the nominal frequency: L = 1/(C omega*^2).
    static VocParams from_capacitance(double sigma, double alpha, double C, double k_v,
                                      double k_i, double omega_star);

    /// Rescales epsilon by `factor` at fixed omega*: C /= factor, L *= factor.
    VocParams with_epsilon_scaled(double factor) const;

    void validate() const;
};

/// Polar state of the unaveraged oscillator: RMS magnitude and instantaneous phase.
struct OscState {
    double V = 0.0;    // volt RMS
    double phi = 0.0;  // rad
};

struct OscRates {
    double dV = 0.0;    // V/s
    double dphi = 0.0;  // rad/s
};

/// Amplitude below which the phase equation is treated as a collapse.
inline constexpr double kOscillatorFloor = 1e-6;

/// Cubic nonlinearity g(u) = u - (alpha / (sigma k_v^2)) u^3.
double g_nonlinearity(double u, const VocParams& p);

/// Right-hand side of the oscillator dynamics driven by feedback current i_fb.
/// Throws OscillatorCollapse when V < kOscillatorFloor.
OscRates voc_derivatives(const OscState& s, double i_fb, const VocParams& p);

/// Instantaneous inverter terminal voltage sqrt(2) V cos(phi).
inline double terminal_voltage(const OscState& s) {
    return std::sqrt(2.0) * s.V * std::cos(s.phi);
}

}  // namespace voc
