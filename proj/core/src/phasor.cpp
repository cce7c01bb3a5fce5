#include "voc/phasor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "voc/errors.hpp"

namespace voc {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void LclFilter::validate() const {
    if (!(L_f > 0.0) || !(C_f > 0.0) || !(L_g > 0.0)) {
        throw std::invalid_argument("LCL filter requires L_f > 0, C_f > 0 and L_g > 0");
    }
    if (R_f < 0.0 || R_c < 0.0 || R_g < 0.0) {
        throw std::invalid_argument("LCL filter resistances must be non-negative");
    }
}

void SeriesRlBranch::validate() const {
    if (!(L > 0.0) || R < 0.0) {
        throw std::invalid_argument("series RL branch '" + label + "' requires L > 0 and R >= 0");
    }
}

ImpedanceConstants ImpedanceConstants::from_complex(Complex z_alpha, Complex z_beta) {
    ImpedanceConstants k;
    k.Z_alpha = std::abs(z_alpha);
    k.theta_alpha = std::arg(z_alpha);
    k.Z_beta = std::abs(z_beta);
    k.theta_beta = std::arg(z_beta);
    k.C_alpha = z_alpha.real();
    k.S_alpha = z_alpha.imag();
    k.C_beta = z_beta.real();
    k.S_beta = z_beta.imag();
    return k;
}

ImpedanceConstants impedance_constants(const LclFilter& filter, double omega_star) {
    filter.validate();
    if (!(omega_star > 0.0)) {
        throw std::invalid_argument("omega_star must be positive");
    }
    const Complex z_f{filter.R_f, omega_star * filter.L_f};
    // R_c + 1/(j w C_f)
    const Complex z_c{filter.R_c, -1.0 / (omega_star * filter.C_f)};
    return ImpedanceConstants::from_complex((z_c + z_f) / z_c, -1.0 / z_c);
}

PowerPair terminal_power(Complex v, Complex i) {
    const Complex s = v * std::conj(i);
    return {s.real(), s.imag()};
}

PhasorSolution solve_network(std::span<const Complex> sources,
                             std::span<const InverterBranch> branches,
                             std::span<const SeriesRlBranch> loads,
                             double omega) {
    if (sources.size() != branches.size() || sources.empty()) {
        throw std::invalid_argument("solve_network: need one source per inverter branch");
    }
    const auto n = static_cast<Eigen::Index>(branches.size());
    const Eigen::Index pcc = n;

    // Unknowns: capacitor-node voltages V_o,k (k < n), then V_pcc.
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n + 1);

    std::vector<Complex> z_f(branches.size()), z_c(branches.size()), z_gl(branches.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto& br = branches[static_cast<std::size_t>(k)];
        br.filter.validate();
        br.line.validate();
        const auto idx = static_cast<std::size_t>(k);
        z_f[idx] = Complex{br.filter.R_f, omega * br.filter.L_f};
        z_c[idx] = Complex{br.filter.R_c, -1.0 / (omega * br.filter.C_f)};
        z_gl[idx] = Complex{br.filter.R_g, omega * br.filter.L_g} + br.line.impedance(omega);

        const Complex y_f = 1.0 / z_f[idx];
        const Complex y_c = 1.0 / z_c[idx];
        const Complex y_g = 1.0 / z_gl[idx];
        Y(k, k) += y_f + y_c + y_g;
        Y(k, pcc) -= y_g;
        Y(pcc, k) -= y_g;
        Y(pcc, pcc) += y_g;
        b(k) += y_f * sources[idx];
    }
    for (const auto& load : loads) {
        load.validate();
        Y(pcc, pcc) += 1.0 / load.impedance(omega);
    }

    Eigen::FullPivLU<Eigen::MatrixXcd> lu(Y);
    if (!lu.isInvertible()) {
        throw SingularNetwork("phasor network matrix is singular");
    }
    const Eigen::VectorXcd x = lu.solve(b);
    for (Eigen::Index k = 0; k <= n; ++k) {
        if (!finite(x(k))) {
            throw SingularNetwork("phasor network solve produced a non-finite node voltage");
        }
    }

    PhasorSolution sol;
    sol.V_pcc = x(pcc);
    sol.inverters.reserve(branches.size());
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const auto& f = branches[idx].filter;
        InverterPhasors ph;
        ph.V = sources[idx];
        ph.V_o = x(k);
        ph.I_f = (ph.V - ph.V_o) / z_f[idx];
        ph.I_g = (ph.V_o - sol.V_pcc) / z_gl[idx];
        ph.output = terminal_power(ph.V, ph.I_f);
        ph.feedback = terminal_power(ph.V, ph.I_g);
        const Complex i_c = ph.I_f - ph.I_g;
        sol.losses += f.R_f * std::norm(ph.I_f) + f.R_c * std::norm(i_c) +
                      (f.R_g + branches[idx].line.R) * std::norm(ph.I_g);
        sol.inverters.push_back(ph);
    }
    sol.load_currents.reserve(loads.size());
    for (const auto& load : loads) {
        const Complex i = sol.V_pcc / load.impedance(omega);
        sol.load_currents.push_back(i);
        const auto s = terminal_power(sol.V_pcc, i);
        sol.load.P += s.P;
        sol.load.Q += s.Q;
    }
    return sol;
}

PhasorSolution solve_two_inverter_phasor(Complex v1, Complex v2,
                                         const InverterBranch& branch1,
                                         const InverterBranch& branch2,
                                         std::span<const SeriesRlBranch> loads,
                                         double omega) {
    const Complex sources[] = {v1, v2};
    const InverterBranch branches[] = {branch1, branch2};
    return solve_network(sources, branches, loads, omega);
}

}  // namespace voc
