#include "voc/dispatch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <limits>

#include "voc/averaged.hpp"
#include "voc/errors.hpp"

namespace voc {

PiLimits PiLimits::around(double kv_design, double ki_design, double lo, double hi) {
    return {lo * kv_design, hi * kv_design, lo * ki_design, hi * ki_design};
}

namespace {

// Conditional integration: hold the integrator while the output is saturated in
// the direction the error would push it.
double pi_channel(double& e, double kp, double ki, double err, double dt, double lo, double hi) {
    const double u = kp * err + e;
    const double de = ki * err * dt;
    const bool high = u > hi && de > 0.0;
    const bool low = u < lo && de < 0.0;
    if (!high && !low) e += de;
    return std::clamp(u, lo, hi);
}

}  // namespace

PiOutput pi_step(const PiState& pi, const PiGains& gains, PowerPair measured, const Setpoint& sp,
                 double dt, const PiLimits& limits) {
    PiOutput out;
    out.state = pi;
    out.k_v = pi_channel(out.state.e_p, gains.Kp_p, gains.Ki_p, measured.P - sp.P_star, dt,
                         limits.kv_min, limits.kv_max);
    out.k_i = pi_channel(out.state.e_q, gains.Kp_q, gains.Ki_q, measured.Q - sp.Q_star, dt,
                         limits.ki_min, limits.ki_max);
    return out;
}

DispatchSystem DispatchSystem::symmetric(const VocParams& params, const InverterBranch& branch,
                                         std::vector<SeriesRlBranch> loads, double omega) {
    DispatchSystem s;
    s.params1 = s.params2 = params;
    s.k1 = s.k2 = impedance_constants(branch.filter, params.omega_star());
    s.branch1 = s.branch2 = branch;
    s.loads = std::move(loads);
    s.omega = omega;
    return s;
}

double security_margin(double V1, PowerPair sp, double mu, const VocParams& p1,
                       const ImpedanceConstants& k1) {
    return p1.sigma * V1 * V1 - mu * (k1.C_alpha * sp.P + k1.S_alpha * sp.Q + k1.C_beta * V1 * V1);
}

double gain_radicand(double mu, double V1, PowerPair sp, const VocParams& p1,
                     const ImpedanceConstants& k1, GainFormula formula) {
    const double V4 = V1 * V1 * V1 * V1;
    const double num = formula == GainFormula::exact ? 1.5 * p1.alpha * V4
                                                     : (p1.sigma - mu * k1.C_beta) * V4;
    return num / security_margin(V1, sp, mu, p1, k1);
}

ControlInputs control_inputs(double mu, double V1, PowerPair sp, const VocParams& p1,
                             const ImpedanceConstants& k1, GainFormula formula) {
    const double margin = security_margin(V1, sp, mu, p1, k1);
    if (!(margin > 0.0)) {
        throw InfeasibleSetpoint(fmt::format(
            "setpoint P={} W, Q={} var violates the security constraint (margin {:.6g})", sp.P,
            sp.Q, margin));
    }
    const double r = gain_radicand(mu, V1, sp, p1, k1, formula);
    // margin -> 0+ sends k_v to infinity; refuse anything beyond 1e6 V/V
    if (!(r > 0.0) || !std::isfinite(r) || r > 1e12) {
        throw InfeasibleSetpoint(fmt::format(
            "setpoint P={} W, Q={} var sits on the security boundary (radicand {:.6g})", sp.P,
            sp.Q, r));
    }
    ControlInputs c;
    c.k_v = std::sqrt(r);
    c.k_i = mu / c.k_v;
    return c;
}

double required_mu(double V1, PowerPair sp, double V2, PowerPair power2, const VocParams& p1,
                   const VocParams& p2, const ImpedanceConstants& k1,
                   const ImpedanceConstants& k2) {
    const double x1 = (k1.C_alpha * sp.Q - k1.S_alpha * sp.P) / (V1 * V1) - k1.S_beta;
    const double x2 = (k2.C_alpha * power2.Q - k2.S_alpha * power2.P) / (V2 * V2) - k2.S_beta;
    const double rhs = p2.omega_star() - p1.omega_star() + p2.k_v * p2.k_i / (2.0 * p2.C) * x2;
    return 2.0 * p1.C * rhs / x1;
}

namespace {

using Vec3 = std::array<double, 3>;
using Residual = std::function<Vec3(const Vec3&)>;

struct NewtonResult {
    Vec3 x{};
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

double norm_inf(const Vec3& f) {
    double n = 0.0;
    for (double v : f) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        n = std::max(n, std::abs(v));
    }
    return n;
}

NewtonResult damped_newton(const Residual& F, Vec3 x, const NewtonOptions& opt) {
    NewtonResult r;
    Vec3 f = F(x);
    double n = norm_inf(f);
    r.x = x;
    r.residual = n;
    if (!std::isfinite(n)) return r;
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (n < opt.tolerance) {
            r.converged = true;
            break;
        }
        r.iterations = it + 1;
        Eigen::Matrix3d J;
        for (int j = 0; j < 3; ++j) {
            Vec3 xp = x;
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            xp[j] += h;
            const Vec3 fp = F(xp);
            for (int i = 0; i < 3; ++i) J(i, j) = (fp[i] - f[i]) / h;
        }
        const Eigen::Vector3d rhs(-f[0], -f[1], -f[2]);
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
        if (!lu.isInvertible()) break;
        const Eigen::Vector3d dx = lu.solve(rhs);
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k) {
            Vec3 xn{x[0] + lambda * dx[0], x[1] + lambda * dx[1], x[2] + lambda * dx[2]};
            if (xn[0] > 0.0 && xn[2] > 0.0) {
                const Vec3 fn = F(xn);
                const double nn = norm_inf(fn);
                if (nn < n || (nn == n && nn < opt.tolerance)) {
                    x = xn;
                    f = fn;
                    n = nn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        r.x = x;
        r.residual = n;
        if (!accepted) break;
    }
    if (n < opt.tolerance) r.converged = true;
    return r;
}

double high_root(PowerPair s, const VocParams& p, const ImpedanceConstants& k) {
    return equilibrium_voltage(s, p, k).V_high;  // NaN beyond the critical loading
}

PhasorSolution evaluate(const DispatchSystem& sys, const Vec3& x) {
    return solve_two_inverter_phasor(std::polar(x[0], x[1]), Complex(x[2], 0.0), sys.branch1,
                                     sys.branch2, sys.loads, sys.omega);
}

}  // namespace

NetworkOperatingPoint natural_equilibrium(const DispatchSystem& sys) {
    const double w_ref = sys.params2.omega_star();
    const Residual F = [&](const Vec3& x) -> Vec3 {
        const auto sol = evaluate(sys, x);
        const auto& s1 = sol.inverters[0].output;
        const auto& s2 = sol.inverters[1].output;
        const double w1 = equilibrium_frequency(s1, x[0], sys.params1, sys.k1);
        const double w2 = equilibrium_frequency(s2, x[2], sys.params2, sys.k2);
        return {(x[0] - high_root(s1, sys.params1, sys.k1)) / sys.params1.k_v,
                (x[2] - high_root(s2, sys.params2, sys.k2)) / sys.params2.k_v,
                (w1 - w2) / w_ref};
    };
    NewtonOptions opt;
    const Vec3 x0{0.95 * sys.params1.k_v, 0.0, 0.95 * sys.params2.k_v};
    const auto r = damped_newton(F, x0, opt);
    if (!r.converged) {
        throw ConvergenceError(
            fmt::format("natural equilibrium did not converge (residual {:.3e})", r.residual),
            r.iterations, r.residual);
    }
    const auto sol = evaluate(sys, r.x);
    NetworkOperatingPoint op;
    op.V1 = r.x[0];
    op.theta1 = r.x[1];
    op.V2 = r.x[2];
    op.power1 = sol.inverters[0].output;
    op.power2 = sol.inverters[1].output;
    op.load = sol.load;
    op.losses = sol.losses;
    op.omega = equilibrium_frequency(op.power2, op.V2, sys.params2, sys.k2);
    op.iterations = r.iterations;
    op.residual = r.residual;
    return op;
}

DispatchEquilibrium dispatch_equilibrium(PowerPair sp, const DispatchSystem& sys,
                                         const NewtonOptions& options) {
    const double s_ref = sys.params1.k_v / sys.params1.k_i;
    auto residual_for = [&](PowerPair target) -> Residual {
        return [&sys, target, s_ref](const Vec3& x) -> Vec3 {
            const auto sol = evaluate(sys, x);
            const auto& s1 = sol.inverters[0].output;
            const auto& s2 = sol.inverters[1].output;
            return {(s1.P - target.P) / s_ref, (s1.Q - target.Q) / s_ref,
                    (x[2] - high_root(s2, sys.params2, sys.k2)) / sys.params2.k_v};
        };
    };

    const auto nat = natural_equilibrium(sys);
    const Vec3 x_nat{nat.V1, nat.theta1, nat.V2};
    NewtonResult r = damped_newton(residual_for(sp), x_nat, options);
    int total = r.iterations;
    for (int steps = 2; !r.converged && steps <= 64; steps *= 2) {
        Vec3 x = x_nat;
        NewtonResult stage;
        for (int s = 1; s <= steps; ++s) {
            const double f = static_cast<double>(s) / steps;
            const PowerPair target{nat.power1.P + f * (sp.P - nat.power1.P),
                                   nat.power1.Q + f * (sp.Q - nat.power1.Q)};
            stage = damped_newton(residual_for(target), x, options);
            total += stage.iterations;
            if (!stage.converged) break;
            x = stage.x;
        }
        r = stage;
    }
    if (!r.converged) {
        throw ConvergenceError(
            fmt::format("dispatch equilibrium for P={} W, Q={} var did not converge "
                        "(last residual {:.3e})",
                        sp.P, sp.Q, r.residual),
            total, r.residual);
    }

    const auto sol = evaluate(sys, r.x);
    DispatchEquilibrium eq;
    eq.V1 = r.x[0];
    eq.theta1 = r.x[1];
    eq.V2 = r.x[2];
    eq.P2 = sol.inverters[1].output.P;
    eq.Q2 = sol.inverters[1].output.Q;
    eq.load = sol.load;
    eq.losses = sol.losses;
    eq.converged = true;
    eq.iterations = total;
    eq.residual = r.residual;
    eq.omega = equilibrium_frequency({eq.P2, eq.Q2}, eq.V2, sys.params2, sys.k2);
    eq.mu = required_mu(eq.V1, sp, eq.V2, {eq.P2, eq.Q2}, sys.params1, sys.params2, sys.k1,
                        sys.k2);
    eq.margin = security_margin(eq.V1, sp, eq.mu, sys.params1, sys.k1);
    eq.radicand = gain_radicand(eq.mu, eq.V1, sp, sys.params1, sys.k1, options.formula);
    eq.achievable = eq.margin > 0.0 && eq.radicand > 0.0 && std::isfinite(eq.radicand) &&
                    eq.mu > 0.0;
    eq.kv1 = eq.ki1 = std::numeric_limits<double>::quiet_NaN();
    if (eq.achievable) {
        try {
            const auto c = control_inputs(eq.mu, eq.V1, sp, sys.params1, sys.k1, options.formula);
            eq.kv1 = c.k_v;
            eq.ki1 = c.k_i;
        } catch (const InfeasibleSetpoint&) {
            eq.achievable = false;
        }
    }
    return eq;
}

}  // namespace voc
