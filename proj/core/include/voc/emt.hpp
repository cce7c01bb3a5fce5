#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "voc/phasor.hpp"

namespace voc {

/// Flat EMT state of the star network. Layout: for each inverter (i_f, v_c, i_g),
/// then one current per load branch. v_c excludes the R_c drop.
class EmtState {
public:
    EmtState() = default;
    EmtState(std::size_t inverters, std::size_t loads)
        : inverters_(inverters), data_(3 * inverters + loads, 0.0) {}

    std::size_t inverters() const { return inverters_; }
    std::size_t loads() const { return data_.size() - 3 * inverters_; }

    double& i_f(std::size_t k) { return data_[3 * k]; }
    double& v_c(std::size_t k) { return data_[3 * k + 1]; }
    double& i_g(std::size_t k) { return data_[3 * k + 2]; }
    double& i_load(std::size_t b) { return data_[3 * inverters_ + b]; }
    double i_f(std::size_t k) const { return data_[3 * k]; }
    double v_c(std::size_t k) const { return data_[3 * k + 1]; }
    double i_g(std::size_t k) const { return data_[3 * k + 2]; }
    double i_load(std::size_t b) const { return data_[3 * inverters_ + b]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

private:
    std::size_t inverters_ = 0;
    std::vector<double> data_;
};

/// Algebraic quantities produced alongside the state derivatives.
struct EmtAlgebraic {
    double v_pcc = 0.0;
    double kcl_residual = 0.0;  // sum(i_g) - sum(i_load) over connected branches
};

/// Electromagnetic-transient model of inverters with LCL filters and lines feeding
/// a PCC with switchable series-RL loads.
///
/// Every branch incident to the PCC is inductive, so the PCC voltage is fixed by the
/// differentiated KCL constraint. Constraint drift is damped by driving the residual
/// r with dr/dt = -r / tau.
class EmtNetwork {
public:
    EmtNetwork(std::vector<InverterBranch> branches, std::vector<SeriesRlBranch> loads,
               double stabilization_tau);

    std::size_t inverters() const { return branches_.size(); }
    std::size_t loads() const { return loads_.size(); }
    std::size_t state_size() const { return 3 * branches_.size() + loads_.size(); }

    const InverterBranch& branch(std::size_t k) const { return branches_[k]; }
    const SeriesRlBranch& load(std::size_t b) const { return loads_[b]; }

    bool connected(std::size_t b) const { return connected_[b] != 0; }
    void set_connected(std::size_t b, bool on) { connected_[b] = on ? 1 : 0; }

    double stabilization_tau() const { return tau_; }

    /// Capacitor-node voltage v_o = v_c + R_c (i_f - i_g).
    double capacitor_node_voltage(std::span<const double> x, std::size_t k) const;

    /// Fills dx (same layout as EmtState) for the given terminal voltages.
    /// Derivatives of disconnected load currents are zero.
    EmtAlgebraic derivatives(std::span<const double> x, std::span<const double> v_terminal,
                             std::span<double> dx) const;

    /// Stored energy 1/2 sum(L i^2) + 1/2 sum(C v_c^2) over connected elements.
    double stored_energy(std::span<const double> x) const;

private:
    std::vector<InverterBranch> branches_;
    std::vector<SeriesRlBranch> loads_;
    std::vector<char> connected_;
    double tau_;
};

}  // namespace voc

namespace voc {

/// Value-returning convenience form of EmtNetwork::derivatives.
EmtState emt_derivatives(const EmtState& state, std::span<const double> v_terminal,
                         const EmtNetwork& network);

}  // namespace voc
