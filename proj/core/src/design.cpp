#include "voc/design.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "voc/averaged.hpp"

namespace voc {

void AcSpec::validate() const {
    if (!(V_min > 0.0) || !(V_oc > V_min)) {
        throw std::invalid_argument("AC ratings require 0 < V_min < V_oc");
    }
    if (!(P_rated > 0.0) || !(Q_rated > 0.0) || !(omega_star > 0.0) || !(d_omega_max > 0.0) ||
        !(t_rise_max > 0.0) || !(delta31_max > 0.0)) {
        throw std::invalid_argument("AC rating limits must all be positive");
    }
}

double s_max(const AcSpec& spec, const ImpedanceConstants& k, SmaxMode mode) {
    switch (mode) {
        case SmaxMode::disc:
            return std::hypot(spec.P_rated, spec.Q_rated) * std::hypot(k.C_alpha, k.S_alpha);
        case SmaxMode::rated_point:
            return k.C_alpha * spec.P_rated;
    }
    return 0.0;
}

double s_domega_max(const AcSpec& spec, const ImpedanceConstants& k, SmaxMode mode) {
    switch (mode) {
        case SmaxMode::disc:
            return std::hypot(spec.P_rated, spec.Q_rated) * std::hypot(k.C_alpha, k.S_alpha);
        case SmaxMode::rated_point:
            return k.C_alpha * spec.Q_rated;
    }
    return 0.0;
}

ScalingFactors scaling_factors(const AcSpec& spec, double S_max) {
    if (!(S_max > 0.0)) {
        throw std::invalid_argument("scaling_factors requires S_max > 0");
    }
    return {spec.V_oc, spec.V_min / S_max};
}

namespace {

// (V_oc / V_min) V_oc^2 / (V_oc^2 - V_min^2); equals sigma_beta of the design.
double voltage_regulation_term(const AcSpec& spec) {
    const double oc2 = spec.V_oc * spec.V_oc;
    const double gap = oc2 - spec.V_min * spec.V_min;
    if (!(gap > 0.0)) {
        throw std::invalid_argument("design requires V_min < V_oc");
    }
    return spec.V_oc / spec.V_min * oc2 / gap;
}

}  // namespace

SigmaAlpha sigma_alpha(const AcSpec& spec, double S_max, const ImpedanceConstants& k) {
    const auto [k_v, k_i] = scaling_factors(spec, S_max);
    const double sigma =
        voltage_regulation_term(spec) + spec.V_min * spec.V_oc * k.C_beta / S_max;
    const double sb = sigma - k_v * k_i * k.C_beta;
    return {sigma, 2.0 / 3.0 * sb};
}

CapacitanceWindow capacitance_window(const AcSpec& spec, double S_max, double S_domega_max,
                                     double sigma, const ImpedanceConstants& k) {
    CapacitanceWindow w;
    const double reg = voltage_regulation_term(spec);
    w.C_min_freq = 1.0 / (2.0 * spec.d_omega_max) *
                   (S_domega_max * spec.V_oc / (spec.V_min * S_max) -
                    k.S_beta * spec.V_oc * spec.V_min / S_max);
    w.C_max_rise = spec.t_rise_max / 6.0 * reg;
    w.C_min_harm = 1.0 / (8.0 * spec.omega_star * spec.delta31_max) * sigma;
    w.feasible = w.lower() <= w.C_max_rise;
    if (!w.feasible) {
        if (w.C_min_freq > w.C_max_rise) w.binding.emplace_back("frequency_offset");
        if (w.C_min_harm > w.C_max_rise) w.binding.emplace_back("harmonic_ratio");
        w.binding.emplace_back("rise_time");
    }
    return w;
}

DesignReport design(const AcSpec& spec, const LclFilter& filter, SmaxMode mode,
                    CapacitanceRule rule) {
    spec.validate();
    DesignReport r;
    r.rule = rule;
    r.constants = impedance_constants(filter, spec.omega_star);
    r.S_max = s_max(spec, r.constants, mode);
    r.S_domega_max = s_domega_max(spec, r.constants, mode);
    const auto gains = scaling_factors(spec, r.S_max);
    const auto sa = sigma_alpha(spec, r.S_max, r.constants);
    r.window = capacitance_window(spec, r.S_max, r.S_domega_max, sa.sigma, r.constants);
    r.feasible = r.window.feasible;

    double C = r.window.C_max_rise;
    switch (rule) {
        case CapacitanceRule::max:
            C = r.window.C_max_rise;
            break;
        case CapacitanceRule::min:
            C = r.window.lower();
            break;
        case CapacitanceRule::midpoint:
            C = 0.5 * (r.window.lower() + r.window.C_max_rise);
            break;
    }
    r.params = VocParams::from_capacitance(sa.sigma, sa.alpha, C, gains.k_v, gains.k_i,
                                           spec.omega_star);
    return r;
}

std::vector<DroopRow> droop_curve(const VocParams& params, const ImpedanceConstants& k,
                                  SweepAxis axis, double fixed_value, double span,
                                  int n_points) {
    if (n_points < 2) {
        throw std::invalid_argument("droop_curve needs at least two points");
    }
    std::vector<DroopRow> rows;
    rows.reserve(static_cast<std::size_t>(n_points));
    for (int n = 0; n < n_points; ++n) {
        DroopRow row;
        row.swept = span * static_cast<double>(n) / static_cast<double>(n_points - 1);
        const PowerPair pq = axis == SweepAxis::P ? PowerPair{row.swept, fixed_value}
                                                  : PowerPair{fixed_value, row.swept};
        const auto eq = equilibrium_voltage(pq, params, k);
        row.feasible = eq.exists;
        if (eq.exists) {
            row.V_eq = eq.V_high;
            row.omega_eq = equilibrium_frequency(pq, eq.V_high, params, k);
        } else {
            row.V_eq = row.omega_eq = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

const char* to_string(SmaxMode mode) {
    return mode == SmaxMode::disc ? "disc" : "rated_point";
}

const char* to_string(CapacitanceRule rule) {
    switch (rule) {
        case CapacitanceRule::max:
            return "max";
        case CapacitanceRule::min:
            return "min";
        case CapacitanceRule::midpoint:
            return "midpoint";
    }
    return "?";
}

}  // namespace voc
