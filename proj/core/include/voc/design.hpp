#pragma once

#include <string>
#include <vector>

#include "voc/oscillator.hpp"
#include "voc/phasor.hpp"

namespace voc {

/// Desired AC performance of a single inverter.
struct AcSpec {
    double V_oc = 0.0;          // open-circuit RMS voltage
    double V_min = 0.0;         // RMS voltage at rated loading
    double P_rated = 0.0;       // watt
    double Q_rated = 0.0;       // var
    double omega_star = 0.0;    // rad/s
    double d_omega_max = 0.0;   // rad/s
    double t_rise_max = 0.0;    // s
    double delta31_max = 0.0;   // third-to-first harmonic ratio

    void validate() const;
};

/// How the maximum of a linear functional over the rated-power disc is evaluated.
///   disc:        exact maximum over P^2 + Q^2 <= S_rated^2
///   rated_point: evaluated at (P_rated, 0) for S_max and (0, Q_rated) for the
///                frequency constant; this reading reproduces published parameter tables.
enum class SmaxMode { disc, rated_point };

enum class CapacitanceRule { max, min, midpoint };

/// Maximum of C_a P + S_a Q.
double s_max(const AcSpec& spec, const ImpedanceConstants& k, SmaxMode mode);

/// Maximum of C_a Q - S_a P (worst case for the frequency offset).
double s_domega_max(const AcSpec& spec, const ImpedanceConstants& k, SmaxMode mode);

struct ScalingFactors {
    double k_v = 0.0;
    double k_i = 0.0;
};

/// k_v = V_oc, k_i = V_min / S_max.
ScalingFactors scaling_factors(const AcSpec& spec, double S_max);

struct SigmaAlpha {
    double sigma = 0.0;
    double alpha = 0.0;
};

/// sigma places the high amplitude root at V_min when C_a P + S_a Q = S_max;
/// alpha = (2/3) sigma_beta places the open-circuit root at V_oc.
SigmaAlpha sigma_alpha(const AcSpec& spec, double S_max, const ImpedanceConstants& k);

struct CapacitanceWindow {
    double C_min_freq = 0.0;  // frequency offset bound (lower)
    double C_min_harm = 0.0;  // harmonic ratio bound (lower)
    double C_max_rise = 0.0;  // rise time bound (upper)
    bool feasible = false;
    /// Names of the constraints that conflict when infeasible.
    std::vector<std::string> binding;

    double lower() const { return C_min_freq > C_min_harm ? C_min_freq : C_min_harm; }
};

CapacitanceWindow capacitance_window(const AcSpec& spec, double S_max, double S_domega_max,
                                     double sigma, const ImpedanceConstants& k);

struct DesignReport {
    VocParams params;
    ImpedanceConstants constants;
    double S_max = 0.0;
    double S_domega_max = 0.0;
    CapacitanceWindow window;
    CapacitanceRule rule = CapacitanceRule::max;
    bool feasible = false;
};

/// Full parameter design. An empty capacitance window is reported through
/// `feasible == false` (params still use the requested rule). Throws
/// std::invalid_argument for degenerate specs such as V_min >= V_oc.
DesignReport design(const AcSpec& spec, const LclFilter& filter,
                    SmaxMode mode = SmaxMode::rated_point,
                    CapacitanceRule rule = CapacitanceRule::max);

enum class SweepAxis { P, Q };

struct DroopRow {
    double swept = 0.0;
    double V_eq = 0.0;
    double omega_eq = 0.0;
    bool feasible = false;
};

/// Embedded droop table from the high amplitude root and the steady-state frequency.
/// Sweeps the chosen axis over [0, span] in n_points rows with the other axis fixed.
std::vector<DroopRow> droop_curve(const VocParams& params, const ImpedanceConstants& k,
                                  SweepAxis axis, double fixed_value, double span,
                                  int n_points);

const char* to_string(SmaxMode mode);
const char* to_string(CapacitanceRule rule);

}  // namespace voc
