#include "voc/emt.hpp"

#include <cmath>
#include <stdexcept>

#include "voc/errors.hpp"

namespace voc {

EmtNetwork::EmtNetwork(std::vector<InverterBranch> branches, std::vector<SeriesRlBranch> loads,
                       double stabilization_tau)
    : branches_(std::move(branches)),
      loads_(std::move(loads)),
      connected_(loads_.size(), 1),
      tau_(stabilization_tau) {
    if (branches_.empty()) {
        throw std::invalid_argument("EMT network needs at least one inverter");
    }
    if (!(tau_ > 0.0)) {
        throw std::invalid_argument("stabilization time constant must be positive");
    }
    for (const auto& b : branches_) {
        b.filter.validate();
        b.line.validate();
    }
    for (const auto& l : loads_) {
        l.validate();
    }
}

double EmtNetwork::capacitor_node_voltage(std::span<const double> x, std::size_t k) const {
    const double i_f = x[3 * k];
    const double v_c = x[3 * k + 1];
    const double i_g = x[3 * k + 2];
    return v_c + branches_[k].filter.R_c * (i_f - i_g);
}

EmtAlgebraic EmtNetwork::derivatives(std::span<const double> x,
                                     std::span<const double> v_terminal,
                                     std::span<double> dx) const {
    const std::size_t n = branches_.size();
    const std::size_t base = 3 * n;

    // Solve the differentiated PCC cut-set constraint for v_pcc:
    //   v_pcc (sum 1/L_g + sum 1/L_b) = sum (v_o - R_g i_g)/L_g + sum R_b i_b / L_b + r/tau
    double residual = 0.0;
    double denom = 0.0;
    double numer = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& br = branches_[k];
        const double L = br.filter.L_g + br.line.L;
        const double R = br.filter.R_g + br.line.R;
        const double i_g = x[3 * k + 2];
        residual += i_g;
        denom += 1.0 / L;
        numer += (capacitor_node_voltage(x, k) - R * i_g) / L;
    }
    for (std::size_t b = 0; b < loads_.size(); ++b) {
        if (!connected_[b]) continue;
        const double i_b = x[base + b];
        residual -= i_b;
        denom += 1.0 / loads_[b].L;
        numer += loads_[b].R * i_b / loads_[b].L;
    }
    numer += residual / tau_;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw SingularNetwork("PCC cut-set equation is singular");
    }
    const double v_pcc = numer / denom;

    for (std::size_t k = 0; k < n; ++k) {
        const auto& f = branches_[k].filter;
        const auto& line = branches_[k].line;
        const double i_f = x[3 * k];
        const double i_g = x[3 * k + 2];
        const double v_o = capacitor_node_voltage(x, k);
        dx[3 * k] = (v_terminal[k] - f.R_f * i_f - v_o) / f.L_f;
        dx[3 * k + 1] = (i_f - i_g) / f.C_f;
        dx[3 * k + 2] = (v_o - (f.R_g + line.R) * i_g - v_pcc) / (f.L_g + line.L);
    }
    for (std::size_t b = 0; b < loads_.size(); ++b) {
        dx[base + b] = connected_[b] ? (v_pcc - loads_[b].R * x[base + b]) / loads_[b].L : 0.0;
    }
    return {v_pcc, residual};
}

double EmtNetwork::stored_energy(std::span<const double> x) const {
    const std::size_t n = branches_.size();
    double e = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& br = branches_[k];
        e += 0.5 * br.filter.L_f * x[3 * k] * x[3 * k];
        e += 0.5 * br.filter.C_f * x[3 * k + 1] * x[3 * k + 1];
        e += 0.5 * (br.filter.L_g + br.line.L) * x[3 * k + 2] * x[3 * k + 2];
    }
    for (std::size_t b = 0; b < loads_.size(); ++b) {
        if (connected_[b]) e += 0.5 * loads_[b].L * x[3 * n + b] * x[3 * n + b];
    }
    return e;
}

EmtState emt_derivatives(const EmtState& state, std::span<const double> v_terminal,
                         const EmtNetwork& network) {
    EmtState d(state.inverters(), state.loads());
    network.derivatives(state.data(), v_terminal, d.data());
    return d;
}

}  // namespace voc
