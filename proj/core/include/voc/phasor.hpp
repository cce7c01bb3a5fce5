#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace voc {

using Complex = std::complex<double>;

/// Output LCL filter. The capacitor branch is R_c in series with C_f.
struct LclFilter {
    double R_f = 0.0;  // ohm
    double L_f = 0.0;  // henry
    double R_c = 0.0;  // ohm
    double C_f = 0.0;  // farad
    double R_g = 0.0;  // ohm
    double L_g = 0.0;  // henry

    void validate() const;
};

/// Series R-L element: a line segment or a load branch.
struct SeriesRlBranch {
    double R = 0.0;  // ohm
    double L = 0.0;  // henry
    std::string label;

    Complex impedance(double omega) const { return {R, omega * L}; }
    void validate() const;
};

/// Rectangular and polar forms of z_alpha = (z_c + z_f)/z_c and z_beta = -1/z_c.
///
/// z_alpha is dimensionless and z_beta is an admittance (siemens). Together they
/// express the grid-side current as I_g = z_alpha I_f + z_beta V.
struct ImpedanceConstants {
    double Z_alpha = 1.0;
    double theta_alpha = 0.0;
    double Z_beta = 0.0;
    double theta_beta = 0.0;
    double C_alpha = 1.0;
    double S_alpha = 0.0;
    double C_beta = 0.0;
    double S_beta = 0.0;

    static ImpedanceConstants from_complex(Complex z_alpha, Complex z_beta);
    Complex z_alpha() const { return {C_alpha, S_alpha}; }
    Complex z_beta() const { return {C_beta, S_beta}; }
};

ImpedanceConstants impedance_constants(const LclFilter& filter, double omega_star);

struct PowerPair {
    double P = 0.0;  // watt
    double Q = 0.0;  // var, positive for lagging (inductive) current
};

/// Complex power with RMS phasors: P + jQ = v conj(i).
PowerPair terminal_power(Complex v, Complex i);

/// Everything between an inverter's terminal and the PCC.
struct InverterBranch {
    LclFilter filter;
    SeriesRlBranch line;
};

struct InverterPhasors {
    Complex V;    // inverter terminal voltage (source)
    Complex V_o;  // filter capacitor node
    Complex I_f;  // filter inductor current
    Complex I_g;  // grid-side current, also the oscillator feedback current
    /// V conj(I_f): the inverter output power the averaged model is written in.
    PowerPair output;
    /// V conj(I_g): the power seen through the feedback current.
    PowerPair feedback;
};

struct PhasorSolution {
    std::vector<InverterPhasors> inverters;
    Complex V_pcc;
    std::vector<Complex> load_currents;
    PowerPair load;       // total over connected load branches
    double losses = 0.0;  // resistive dissipation in filters and lines, watt
};

/// Quasi-static nodal solution of the star network: every inverter branch
/// (filter + line) terminates at a common PCC with the given load branches to ground.
/// Phasors use the RMS convention. Throws SingularNetwork on a degenerate system.
PhasorSolution solve_network(std::span<const Complex> sources,
                             std::span<const InverterBranch> branches,
                             std::span<const SeriesRlBranch> loads,
                             double omega);

PhasorSolution solve_two_inverter_phasor(Complex v1, Complex v2,
                                         const InverterBranch& branch1,
                                         const InverterBranch& branch2,
                                         std::span<const SeriesRlBranch> loads,
                                         double omega);

}  // namespace voc
