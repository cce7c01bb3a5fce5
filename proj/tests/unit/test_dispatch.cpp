#include <cmath>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"
#include "voc/averaged.hpp"
#include "voc/dispatch.hpp"
#include "voc/errors.hpp"
#include "voc/phasor.hpp"
#include "voc/reference.hpp"

using namespace voc;
using Catch::Approx;

namespace {
PiLimits wide() { return {-1e9, 1e9, -1e9, 1e9}; }
}  // namespace

TEST_CASE("PI at zero error holds its state", "[dispatch]") {
    const PiState s{126.0, 0.15};
    const auto out = pi_step(s, reference::pi_gains(), {500.0, 83.0}, {500.0, 83.0, 0.0}, 1e-3, wide());
    CHECK(out.k_v == 126.0);
    CHECK(out.k_i == 0.15);
    CHECK(out.state.e_p == 126.0);
    CHECK(out.state.e_q == 0.15);
}

TEST_CASE("PI integrates a constant error", "[dispatch]") {
    PiState s{126.0, 0.15};
    const Setpoint sp{400.0, 0.0, 0.0};
    PiOutput out;
    for (int n = 0; n < 1000; ++n) {
        out = pi_step(s, reference::pi_gains(), {500.0, 0.0}, sp, 1e-3, wide());
        s = out.state;
    }
    CHECK(s.e_p == Approx(126.0 - 15.0).epsilon(1e-12));
    CHECK(out.k_v == Approx(126.0 - 15.0 + 0.015 - 0.1).epsilon(1e-12));
}

TEST_CASE("PI clamps and freezes the saturated integrator", "[dispatch]") {
    const auto lim = PiLimits::around(126.0, 0.15);
    CHECK(lim.kv_min == Approx(25.2));
    CHECK(lim.ki_max == Approx(0.45));
    PiState s{126.0, 0.15};
    for (int n = 0; n < 200000; ++n) {
        s = pi_step(s, reference::pi_gains(), {5000.0, 0.0}, {0.0, 0.0, 0.0}, 1e-3, lim).state;
    }
    const auto out = pi_step(s, reference::pi_gains(), {5000.0, 0.0}, {0.0, 0.0, 0.0}, 1e-3, lim);
    CHECK(out.k_v == lim.kv_min);
    CHECK(s.e_p > lim.kv_min - 10.0);  // no runaway
    // reversing the error unwinds immediately
    const auto back = pi_step(s, reference::pi_gains(), {0.0, 0.0}, {5000.0, 0.0, 0.0}, 1e-3, lim);
    CHECK(back.state.e_p > s.e_p);
}

TEST_CASE("security margin examples", "[dispatch]") {
    const auto p = reference::parameters();
    const auto k = impedance_constants(reference::filter(), reference::omega_star());
    CHECK(security_margin(120.0, {500.0, 83.0}, 0.0, p, k) == Approx(p.sigma * 120.0 * 120.0));
    ImpedanceConstants none;
    none.C_beta = 0.0;
    CHECK(security_margin(120.0, {0.0, 0.0}, 19.0, p, none) == Approx(p.sigma * 14400.0));
}

TEST_CASE("gain law consistency", "[dispatch]") {
    const auto p = reference::parameters();
    const auto k = impedance_constants(reference::filter(), reference::omega_star());
    for (auto formula : {GainFormula::exact, GainFormula::literal}) {
        const double mu = p.k_v * p.k_i;
        const auto g = control_inputs(mu, 118.0, {500.0, 83.0}, p, k, formula);
        CHECK(g.k_v * g.k_i == Approx(mu).epsilon(1e-15));
        if (formula == GainFormula::exact) {
            VocParams q = p;
            q.k_v = g.k_v;
            q.k_i = g.k_i;
            const auto r = averaged_derivatives({118.0, 0.0}, {500.0, 83.0}, q, k, q.omega_star());
            CHECK(std::abs(r.dV) / (p.sigma / (2 * p.C) * 118.0) < 1e-9);
        }
    }
    // without load terms (C_beta = 0) the exact law gives back V itself scaled by the
    // open-circuit relation
    ImpedanceConstants none;
    const auto g = control_inputs(19.0, 120.0, {0.0, 0.0}, p, none);
    CHECK(g.k_v == Approx(120.0 * std::sqrt(1.5 * p.alpha / p.sigma)));
    CHECK_THROWS_AS(control_inputs(1e6, 120.0, {500.0, 83.0}, p, k), InfeasibleSetpoint);
}

TEST_CASE("natural equilibrium recovers the design gains", "[dispatch]") {
    const auto sys = reference::dispatch_system();
    const auto nat = natural_equilibrium(sys);
    CHECK(nat.residual < 1e-8);
    CHECK(std::abs(nat.theta1) < 1e-9);
    CHECK(nat.V1 == Approx(nat.V2));
    const auto eq = dispatch_equilibrium(nat.power1, sys);
    CHECK(eq.achievable);
    CHECK(eq.mu == Approx(sys.params1.k_v * sys.params1.k_i).epsilon(1e-8));
    CHECK(eq.kv1 == Approx(sys.params1.k_v).epsilon(1e-7));
    CHECK(eq.ki1 == Approx(sys.params1.k_i).epsilon(1e-7));
    const auto lit = dispatch_equilibrium(nat.power1, sys, {100, 1e-10, GainFormula::literal});
    CHECK(lit.kv1 == Approx(sys.params1.k_v).epsilon(1e-7));
}

TEST_CASE("table cases are achievable and self-consistent", "[dispatch]") {
    const auto sys = reference::dispatch_system();
    for (const auto& sp : reference::dispatch_schedule()) {
        const PowerPair s{sp.P_star, sp.Q_star};
        const auto eq = dispatch_equilibrium(s, sys);
        INFO("setpoint " << sp.P_star << "/" << sp.Q_star);
        REQUIRE(eq.achievable);
        CHECK(eq.margin > 0.0);
        CHECK(eq.kv1 > 0.0);
        CHECK(eq.ki1 > 0.0);
        CHECK(eq.kv1 * eq.ki1 == Approx(eq.mu).epsilon(1e-14));

        // network flows at the solution match the setpoint and inverter 2's equilibrium
        const auto sol = solve_two_inverter_phasor(std::polar(eq.V1, eq.theta1), {eq.V2, 0.0},
                                                   sys.branch1, sys.branch2, sys.loads, sys.omega);
        CHECK(sol.inverters[0].output.P == Approx(sp.P_star).epsilon(1e-8));
        CHECK(sol.inverters[0].output.Q == Approx(sp.Q_star).epsilon(1e-8));
        const PowerPair p2 = sol.inverters[1].output;
        CHECK(eq.P2 == Approx(p2.P).epsilon(1e-8));
        CHECK(equilibrium_voltage(p2, sys.params2, sys.k2).V_high == Approx(eq.V2).epsilon(1e-8));
        CHECK(equilibrium_frequency(p2, eq.V2, sys.params2, sys.k2) == Approx(eq.omega).epsilon(1e-8));

        // inverter 1 with the recovered gains is in equilibrium at the same frequency
        VocParams q = sys.params1;
        q.k_v = eq.kv1;
        q.k_i = eq.ki1;
        const auto r = averaged_derivatives({eq.V1, 0.0}, s, q, sys.k1, eq.omega);
        CHECK(std::abs(r.dV) / (q.sigma / (2 * q.C) * eq.V1) < 1e-9);
        CHECK(std::abs(r.dtheta) < 1e-8);
        CHECK(sp.P_star + eq.P2 == Approx(eq.load.P + eq.losses).epsilon(1e-6));

        // the literal law gives nearly the same gains
        const auto lit = dispatch_equilibrium(s, sys, {100, 1e-10, GainFormula::literal});
        CHECK(lit.kv1 == Approx(eq.kv1).epsilon(1e-3));
    }
}

TEST_CASE("dispatch equilibrium agrees with the grid search", "[dispatch]") {
    const auto sys = reference::dispatch_system();
    const auto nat = natural_equilibrium(sys);
    const auto eq = dispatch_equilibrium({500.0, 83.0}, sys);
    const auto g = oracle::grid_search_dispatch({500.0, 83.0}, sys, nat.V1, nat.theta1, nat.V2);
    CHECK(g.V1 == Approx(eq.V1).epsilon(1e-6));
    CHECK(g.V2 == Approx(eq.V2).epsilon(1e-6));
    CHECK(g.theta1 == Approx(eq.theta1).margin(1e-6));
    CHECK(g.margin == Approx(eq.margin).epsilon(1e-4));
}

TEST_CASE("excessive setpoint is reported, not thrown", "[dispatch]") {
    const auto sys = reference::dispatch_system();
    const auto eq = dispatch_equilibrium({2000.0, 83.0}, sys);
    CHECK(eq.converged);
    CHECK_FALSE(eq.achievable);
    CHECK(eq.margin <= 0.0);
    CHECK(std::isnan(eq.kv1));
}

TEST_CASE("unreachable setpoint raises a convergence error", "[dispatch]") {
    const auto sys = reference::dispatch_system();
    try {
        dispatch_equilibrium({1e5, 83.0}, sys);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 1e-10);
    }
}
