#pragma once

#include <array>
#include <vector>

#include "voc/oscillator.hpp"
#include "voc/phasor.hpp"

namespace voc {

/// PI gains. The active channel drives k_v, the reactive channel drives k_i.
struct PiGains {
    double Kp_p = -0.001;
    double Ki_p = -0.15;
    double Kp_q = 0.0001;
    double Ki_q = 0.01;
};

struct PiState {
    double e_p = 0.0;  // integrator of the k_v channel
    double e_q = 0.0;  // integrator of the k_i channel
};

/// Output clamps; integration is frozen while an output is saturated.
struct PiLimits {
    double kv_min = 0.0;
    double kv_max = 0.0;
    double ki_min = 0.0;
    double ki_max = 0.0;

    /// [lo, hi] times the design gains.
    static PiLimits around(double kv_design, double ki_design, double lo = 0.2, double hi = 3.0);
};

struct Setpoint {
    double P_star = 0.0;  // watt
    double Q_star = 0.0;  // var
    double t_start = 0.0; // s
};

struct PiOutput {
    double k_v = 0.0;
    double k_i = 0.0;
    PiState state;
};

/// One zero-order-hold controller step: outputs use the integrator values at the
/// start of the step, then the integrators advance by Ki * error * dt.
PiOutput pi_step(const PiState& pi, const PiGains& gains, PowerPair measured, const Setpoint& sp,
                 double dt, const PiLimits& limits);

/// Two inverters on a common PCC. Inverter 1 is dispatched, inverter 2 stays at its
/// design parameters and picks up the balance.
struct DispatchSystem {
    VocParams params1;
    VocParams params2;
    ImpedanceConstants k1;
    ImpedanceConstants k2;
    InverterBranch branch1;
    InverterBranch branch2;
    std::vector<SeriesRlBranch> loads;
    double omega = 0.0;  // frequency the network impedances are evaluated at

    static DispatchSystem symmetric(const VocParams& params, const InverterBranch& branch,
                                    std::vector<SeriesRlBranch> loads, double omega);
};

/// How the gains are recovered from mu.
///   exact:   k_v^2 = (3 alpha / 2) V^4 / margin, the zero of the averaged amplitude equation
///   literal: k_v^2 = (sigma - mu C_beta) V^4 / margin, which coincides with `exact`
///            only when mu equals the design product k_v k_i
enum class GainFormula { exact, literal };

struct ControlInputs {
    double k_v = 0.0;
    double k_i = 0.0;
};

/// sigma V^2 - mu (C_a P* + S_a Q* + C_b V^2).
double security_margin(double V1, PowerPair setpoint, double mu, const VocParams& p1,
                       const ImpedanceConstants& k1);

/// Radicand of the gain law, numerator / margin. Non-positive or non-finite means
/// no real positive gain exists.
double gain_radicand(double mu, double V1, PowerPair setpoint, const VocParams& p1,
                     const ImpedanceConstants& k1, GainFormula formula = GainFormula::exact);

/// Positive root of the gain law and k_i = mu / k_v.
/// Throws InfeasibleSetpoint when the security margin is not positive or k_v would
/// exceed any usable range.
ControlInputs control_inputs(double mu, double V1, PowerPair setpoint, const VocParams& p1,
                             const ImpedanceConstants& k1,
                             GainFormula formula = GainFormula::exact);

/// Gain product that makes inverter 1 run at the common frequency of inverter 2
/// while delivering the setpoint: equality of the two steady-state frequencies.
double required_mu(double V1, PowerPair setpoint, double V2, PowerPair power2,
                   const VocParams& p1, const VocParams& p2, const ImpedanceConstants& k1,
                   const ImpedanceConstants& k2);

struct NetworkOperatingPoint {
    double V1 = 0.0;
    double theta1 = 0.0;  // relative to inverter 2
    double V2 = 0.0;
    PowerPair power1;     // output power V conj(I_f)
    PowerPair power2;
    PowerPair load;
    double losses = 0.0;
    double omega = 0.0;   // steady-state frequency
    int iterations = 0;
    double residual = 0.0;
};

/// Steady state with both inverters at their own parameters (no dispatch).
/// Throws ConvergenceError.
NetworkOperatingPoint natural_equilibrium(const DispatchSystem& sys);

struct DispatchEquilibrium {
    double V1 = 0.0;
    double theta1 = 0.0;
    double V2 = 0.0;
    double P2 = 0.0;
    double Q2 = 0.0;
    double omega = 0.0;
    double mu = 0.0;
    double margin = 0.0;
    double radicand = 0.0;
    double kv1 = 0.0;  // NaN when not achievable
    double ki1 = 0.0;
    bool converged = false;
    bool achievable = false;
    int iterations = 0;
    double residual = 0.0;
    PowerPair load;
    double losses = 0.0;
};

struct NewtonOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
    GainFormula formula = GainFormula::exact;
};

/// Steady state in which inverter 1 delivers (P1*, Q1*) and inverter 2 sits on its
/// high amplitude root. Damped Newton on (V1, theta1 - theta2, V2) started from the
/// natural equilibrium, with continuation in the setpoint as fallback.
/// Throws ConvergenceError carrying the last residual.
DispatchEquilibrium dispatch_equilibrium(PowerPair setpoint, const DispatchSystem& sys,
                                         const NewtonOptions& options = {});

}  // namespace voc
