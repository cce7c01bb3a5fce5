#include <complex>
#include <vector>

#include <benchmark/benchmark.h>

#include "voc/averaged.hpp"
#include "voc/design.hpp"
#include "voc/dispatch.hpp"
#include "voc/emt.hpp"
#include "voc/integrator.hpp"
#include "voc/oscillator.hpp"
#include "voc/phasor.hpp"
#include "voc/reference.hpp"
#include "voc/simulation.hpp"

using namespace voc;

static void BM_PhasorTwoInverters(benchmark::State& state) {
    const auto br = reference::inverter_branch();
    const std::vector<SeriesRlBranch> loads{reference::load()};
    const Complex v1 = std::polar(125.0, 0.05), v2(124.0, 0.0);
    for (auto _ : state) {
        auto s = solve_two_inverter_phasor(v1, v2, br, br, loads, reference::omega_star());
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_PhasorTwoInverters);

static void BM_EmtDerivatives(benchmark::State& state) {
    const auto br = reference::inverter_branch();
    const double w = reference::omega_star();
    EmtNetwork net({br, br}, {reference::load(), {44.24, 10.85 / w, "z_S"}}, 5e-5);
    std::vector<double> x(net.state_size(), 1.0), dx(net.state_size());
    const std::vector<double> v{170.0, 165.0};
    for (auto _ : state) {
        auto alg = net.derivatives(x, v, dx);
        benchmark::DoNotOptimize(alg);
        benchmark::DoNotOptimize(dx.data());
    }
}
BENCHMARK(BM_EmtDerivatives);

static void BM_OscillatorRk4Step(benchmark::State& state) {
    const auto p = reference::parameters();
    std::vector<double> x{126.0, 0.0};
    Rk4 rk(2);
    auto f = [&](double, std::span<const double> s, std::span<double> d) {
        const auto r = voc_derivatives({s[0], s[1]}, 3.0, p);
        d[0] = r.dV;
        d[1] = r.dphi;
    };
    double t = 0.0;
    for (auto _ : state) {
        rk.step(x, t, 5e-6, f);
        t += 5e-6;
    }
    benchmark::DoNotOptimize(x.data());
}
BENCHMARK(BM_OscillatorRk4Step);

static void BM_AveragedDerivatives(benchmark::State& state) {
    const auto p = reference::parameters();
    const auto k = impedance_constants(reference::filter(), reference::omega_star());
    for (auto _ : state) {
        auto r = averaged_derivatives({120.0, 0.1}, {500.0, 83.0}, p, k, p.omega_star());
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_AveragedDerivatives);

static void BM_Design(benchmark::State& state) {
    for (auto _ : state) {
        auto r = design(reference::ac_spec(), reference::filter());
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_Design);

static void BM_DispatchEquilibrium(benchmark::State& state) {
    const auto sys = reference::dispatch_system();
    for (auto _ : state) {
        auto eq = dispatch_equilibrium({500.0, 83.0}, sys);
        benchmark::DoNotOptimize(eq);
    }
}
BENCHMARK(BM_DispatchEquilibrium)->Unit(benchmark::kMicrosecond);

static void BM_SimulateRiseTime(benchmark::State& state) {
    auto sc = reference::rise_time_scenario();
    sc.duration_s = 0.1;
    for (auto _ : state) {
        auto r = run(sc);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_SimulateRiseTime)->Unit(benchmark::kMillisecond);

static void BM_SimulateDispatchAveraged(benchmark::State& state) {
    const auto sc = reference::dispatch_scenario(Model::averaged);
    for (auto _ : state) {
        auto r = run(sc);
        benchmark::DoNotOptimize(r);
    }
}
BENCHMARK(BM_SimulateDispatchAveraged)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
