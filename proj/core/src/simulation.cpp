#include "voc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "voc/averaged.hpp"
#include "voc/emt.hpp"
#include "voc/errors.hpp"
#include "voc/fourier.hpp"
#include "voc/integrator.hpp"
#include "voc/power_meter.hpp"

namespace voc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kKclRecovery = 5e-3;

bool reached(double t, double t_event, double dt) { return t >= t_event - 1e-6 * dt; }

// Setpoint lookup and the PI loop of inverter 1.
class Dispatcher {
public:
    Dispatcher(const std::optional<DispatchSetup>& setup, const VocParams& design)
        : setup_(setup ? &*setup : nullptr), kv_design_(design.k_v), ki_design_(design.k_i) {
        if (setup_) {
            limits_ = PiLimits::around(kv_design_, ki_design_, setup_->clamp_low,
                                       setup_->clamp_high);
        }
    }

    const Setpoint* active(double t, double dt) const {
        if (!setup_) return nullptr;
        const Setpoint* sp = nullptr;
        for (const auto& s : setup_->schedule) {
            if (reached(t, s.t_start, dt)) sp = &s;
        }
        return sp;
    }

    // Zero-order hold: the gains computed here apply over [t, t + dt).
    void update(double t, double dt, std::optional<PowerPair> measured, VocParams& p1) {
        const Setpoint* sp = active(t, dt);
        if (!sp) return;
        if (!started_) {
            state_ = {kv_design_, ki_design_};
            started_ = true;
        }
        if (!measured) return;
        const auto out = pi_step(state_, setup_->gains, *measured, *sp, dt, limits_);
        state_ = out.state;
        p1.k_v = out.k_v;
        p1.k_i = out.k_i;
    }

    double margin(double t, double dt, double V1, const VocParams& p1,
                  const ImpedanceConstants& k1) const {
        const Setpoint* sp = active(t, dt);
        if (!sp) return kNaN;
        return security_margin(V1, {sp->P_star, sp->Q_star}, p1.k_v * p1.k_i, p1, k1);
    }

private:
    const DispatchSetup* setup_;
    double kv_design_;
    double ki_design_;
    PiLimits limits_;
    PiState state_;
    bool started_ = false;
};

struct StepPlan {
    double dt;
    long long steps;
    long long decimation;
};

StepPlan plan(const Scenario& sc) {
    StepPlan p;
    p.dt = sc.step();
    p.steps = static_cast<long long>(std::llround(sc.duration_s / p.dt));
    p.decimation = std::max(1LL, static_cast<long long>(std::llround(sc.trace_interval_s / p.dt)));
    return p;
}

[[noreturn]] void abort_run(const std::exception& e, double t, std::span<const double> x) {
    throw SimulationAborted(fmt::format("simulation aborted at t = {:.6f} s: {}", t, e.what()),
                            t, std::vector<double>(x.begin(), x.end()));
}

// ---------------------------------------------------------------- averaged models

struct AveragedRun {
    std::vector<TraceRow> rows;
    std::vector<double> balance;  // at every segment end
    RunReport report;
};

AveragedRun run_averaged(const Scenario& sc) {
    const std::size_t n = sc.inverters.size();
    const double w_ref = sc.inverters[0].params.omega_star();
    const StepPlan sp = plan(sc);

    std::vector<VocParams> params;
    std::vector<ImpedanceConstants> consts;
    std::vector<InverterBranch> branches;
    std::vector<double> x(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& inv = sc.inverters[k];
        params.push_back(inv.params);
        consts.push_back(sc.model == Model::legacy
                             ? legacy_constants()
                             : impedance_constants(inv.branch.filter, inv.params.omega_star()));
        branches.push_back(inv.branch);
        x[2 * k] = std::isnan(inv.V0)
                       ? equilibrium_voltage({0.0, 0.0}, params[k], consts[k]).V_oc
                       : inv.V0;
        x[2 * k + 1] = inv.theta0;
    }

    std::vector<char> on(sc.loads.size(), 0);
    std::vector<SeriesRlBranch> active;
    auto rebuild = [&] {
        active.clear();
        for (std::size_t b = 0; b < sc.loads.size(); ++b) {
            if (on[b]) active.push_back(sc.loads[b].branch);
        }
    };
    auto apply_events = [&](double t) {
        bool changed = false;
        for (std::size_t b = 0; b < sc.loads.size(); ++b) {
            const bool want = reached(t, sc.loads[b].connect_s, sp.dt) &&
                              !reached(t, sc.loads[b].disconnect_s, sp.dt);
            if (want != static_cast<bool>(on[b])) {
                on[b] = want ? 1 : 0;
                changed = true;
            }
        }
        if (changed) rebuild();
    };

    std::vector<Complex> sources(n);
    auto solve = [&](std::span<const double> s) {
        for (std::size_t k = 0; k < n; ++k) sources[k] = std::polar(s[2 * k], s[2 * k + 1]);
        return solve_network(sources, branches, active, w_ref);
    };
    auto deriv = [&](double, std::span<const double> s, std::span<double> ds) {
        const auto sol = solve(s);
        for (std::size_t k = 0; k < n; ++k) {
            const auto r = averaged_derivatives({s[2 * k], s[2 * k + 1]}, sol.inverters[k].output,
                                                params[k], consts[k], w_ref);
            ds[2 * k] = r.dV;
            ds[2 * k + 1] = r.dtheta;
        }
    };

    Dispatcher dispatcher(sc.dispatch, params[0]);
    const auto boundaries = sc.segment_boundaries();
    std::size_t next_boundary = 1;

    AveragedRun out;
    Rk4 rk(x.size());
    double t = 0.0;
    try {
        for (long long k = 0; k <= sp.steps; ++k) {
            t = static_cast<double>(k) * sp.dt;
            auto sol = solve(x);
            while (next_boundary < boundaries.size() && reached(t, boundaries[next_boundary], sp.dt)) {
                double gen = 0.0;
                for (const auto& inv : sol.inverters) gen += inv.output.P;
                const double scale = std::max({std::abs(sol.load.P), std::abs(gen), 1.0});
                out.balance.push_back(std::abs(gen - sol.load.P - sol.losses) / scale);
                ++next_boundary;
            }
            apply_events(t);
            sol = solve(x);
            dispatcher.update(t, sp.dt, sol.inverters[0].output, params[0]);

            if (k % sp.decimation == 0) {
                TraceRow row;
                row.t = t;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto& pq = sol.inverters[j].output;
                    const auto r = averaged_derivatives({x[2 * j], x[2 * j + 1]}, pq, params[j],
                                                        consts[j], w_ref);
                    row.inverters.push_back({x[2 * j], x[2 * j + 1], (w_ref + r.dtheta) / kTwoPi,
                                             pq.P, pq.Q, params[j].k_v, params[j].k_i});
                }
                row.load_P = sol.load.P;
                row.load_Q = sol.load.Q;
                row.margin = dispatcher.margin(t, sp.dt, x[0], params[0], consts[0]);
                out.rows.push_back(std::move(row));
            }
            if (k == sp.steps) break;
            rk.step(x, t, sp.dt, deriv);
        }
    } catch (const SimulationAborted&) {
        throw;
    } catch (const Error& e) {
        abort_run(e, t, x);
    }
    out.report.dt = sp.dt;
    out.report.steps = static_cast<std::size_t>(sp.steps);
    out.report.fundamental_hz = out.report.harmonic_1 = out.report.harmonic_3 =
        out.report.harmonic_ratio = kNaN;
    out.report.kcl_residual_max = kNaN;
    return out;
}

// ---------------------------------------------------------------- actual model

// (phi(t) - phi(t - T)) / T over one nominal cycle.
class CycleDifferentiator {
public:
    explicit CycleDifferentiator(double period) : T_(period) {}

    void push(double t, double phi) {
        hist_.push_back({t, phi});
        while (hist_.size() > 2 && hist_[1].first <= t - T_) hist_.pop_front();
    }

    std::optional<double> rate() const {
        if (hist_.size() < 2) return std::nullopt;
        const double t = hist_.back().first;
        const double target = t - T_;
        if (hist_.front().first > target) return std::nullopt;
        const auto& a = hist_[0];
        const auto& b = hist_[1];
        const double w = (target - a.first) / (b.first - a.first);
        const double phi_old = a.second + w * (b.second - a.second);
        return (hist_.back().second - phi_old) / T_;
    }

private:
    double T_;
    std::deque<std::pair<double, double>> hist_;
};

struct ActualRun {
    std::vector<TraceRow> rows;
    RunReport report;
};

ActualRun run_actual(const Scenario& sc) {
    const std::size_t n = sc.inverters.size();
    const double w_ref = sc.inverters[0].params.omega_star();
    const double T_nom = kTwoPi / w_ref;
    const StepPlan sp = plan(sc);

    std::vector<VocParams> params;
    std::vector<ImpedanceConstants> consts;
    std::vector<InverterBranch> branches;
    std::vector<SeriesRlBranch> load_branches;
    for (const auto& inv : sc.inverters) {
        params.push_back(inv.params);
        consts.push_back(impedance_constants(inv.branch.filter, inv.params.omega_star()));
        branches.push_back(inv.branch);
    }
    for (const auto& l : sc.loads) load_branches.push_back(l.branch);
    EmtNetwork net(branches, load_branches, 10.0 * sp.dt);
    for (std::size_t b = 0; b < sc.loads.size(); ++b) {
        net.set_connected(b, reached(0.0, sc.loads[b].connect_s, sp.dt));
    }

    const std::size_t off = 2 * n;
    std::vector<double> x(off + net.state_size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto& p = params[k];
        x[2 * k] = std::isnan(sc.inverters[k].V0) ? p.k_v * std::sqrt(2.0 * p.sigma / (3.0 * p.alpha))
                                                  : sc.inverters[k].V0;
        x[2 * k + 1] = sc.inverters[k].theta0;
    }

    std::vector<double> v_term(n);
    EmtAlgebraic alg;
    const bool before = sc.feedback_tap == FeedbackTap::before_filter;
    auto deriv = [&](double, std::span<const double> s, std::span<double> ds) {
        for (std::size_t k = 0; k < n; ++k) {
            v_term[k] = std::sqrt(2.0) * s[2 * k] * std::cos(s[2 * k + 1]);
        }
        const auto emt = s.subspan(off);
        alg = net.derivatives(emt, v_term, ds.subspan(off));
        for (std::size_t k = 0; k < n; ++k) {
            const double i_fb = before ? emt[3 * k] : emt[3 * k + 2];
            const auto r = voc_derivatives({s[2 * k], s[2 * k + 1]}, i_fb, params[k]);
            ds[2 * k] = r.dV;
            ds[2 * k + 1] = r.dphi;
        }
    };

    std::vector<PowerMeter> meters(n, PowerMeter(w_ref));
    PowerMeter load_meter(w_ref);
    std::vector<CycleDifferentiator> phase(n, CycleDifferentiator(T_nom));
    Dispatcher dispatcher(sc.dispatch, params[0]);
    std::vector<char> pending_open(sc.loads.size(), 0);
    std::vector<char> connected_once(sc.loads.size(), 0);
    for (std::size_t b = 0; b < sc.loads.size(); ++b) connected_once[b] = net.connected(b);
    double last_event = -1.0;

    const double harmonic_start = sc.duration_s - sc.harmonic_window_s;
    std::vector<double> h_t, h_v;

    ActualRun out;
    out.report.kcl_residual_max = 0.0;
    Rk4 rk(x.size());
    std::vector<double> dx(x.size());
    double t = 0.0;
    try {
        for (long long k = 0; k <= sp.steps; ++k) {
            t = static_cast<double>(k) * sp.dt;
            for (std::size_t b = 0; b < sc.loads.size(); ++b) {
                const auto& l = sc.loads[b];
                if (!connected_once[b] && reached(t, l.connect_s, sp.dt) &&
                    !reached(t, l.disconnect_s, sp.dt)) {
                    net.set_connected(b, true);
                    x[off + 3 * n + b] = 0.0;
                    connected_once[b] = 1;
                    last_event = t;
                }
                if (net.connected(b) && reached(t, l.disconnect_s, sp.dt)) pending_open[b] = 1;
            }

            deriv(t, x, dx);
            if (t - last_event > kKclRecovery || last_event < 0.0) {
                out.report.kcl_residual_max =
                    std::max(out.report.kcl_residual_max, std::abs(alg.kcl_residual));
            }
            double i_load = 0.0;
            for (std::size_t b = 0; b < sc.loads.size(); ++b) {
                if (net.connected(b)) i_load += x[off + 3 * n + b];
            }
            for (std::size_t j = 0; j < n; ++j) {
                meters[j].push(t, v_term[j], x[off + 3 * j], dx[2 * j + 1]);
                phase[j].push(t, x[2 * j + 1]);
            }
            load_meter.push(t, alg.v_pcc, i_load, dx[1]);
            dispatcher.update(t, sp.dt, meters[0].average(), params[0]);
            if (t >= harmonic_start) {
                h_t.push_back(t);
                h_v.push_back(std::sqrt(2.0) * x[0] * std::cos(x[1]));
            }

            if (k % sp.decimation == 0) {
                TraceRow row;
                row.t = t;
                for (std::size_t j = 0; j < n; ++j) {
                    const auto pq = meters[j].average();
                    const double rate = phase[j].rate().value_or(dx[2 * j + 1]);
                    row.inverters.push_back({x[2 * j], x[2 * j + 1] - w_ref * t, rate / kTwoPi,
                                             pq ? pq->P : kNaN, pq ? pq->Q : kNaN, params[j].k_v,
                                             params[j].k_i});
                }
                const auto lp = load_meter.average();
                row.load_P = lp ? lp->P : kNaN;
                row.load_Q = lp ? lp->Q : kNaN;
                row.margin = dispatcher.margin(t, sp.dt, x[0], params[0], consts[0]);
                out.rows.push_back(std::move(row));
            }
            if (k == sp.steps) break;

            std::vector<double> before_step;
            bool any_pending = false;
            for (char c : pending_open) any_pending = any_pending || c;
            if (any_pending) before_step.assign(x.begin() + off + 3 * n, x.end());
            rk.step(x, t, sp.dt, deriv);
            // breaker opens at the current zero crossing
            for (std::size_t b = 0; b < sc.loads.size(); ++b) {
                if (!pending_open[b]) continue;
                double& i = x[off + 3 * n + b];
                if (before_step[b] * i <= 0.0) {
                    i = 0.0;
                    net.set_connected(b, false);
                    pending_open[b] = 0;
                    last_event = t + sp.dt;
                }
            }
        }
    } catch (const SimulationAborted&) {
        throw;
    } catch (const Error& e) {
        abort_run(e, t, x);
    } catch (const std::invalid_argument& e) {
        abort_run(e, t, x);
    }

    auto& rep = out.report;
    rep.dt = sp.dt;
    rep.steps = static_cast<std::size_t>(sp.steps);
    rep.fundamental_hz = rep.harmonic_1 = rep.harmonic_3 = rep.harmonic_ratio = kNaN;
    if (h_t.size() > 2) {
        try {
            rep.fundamental_hz = estimate_fundamental(h_t, h_v);
            const int orders[] = {1, 3};
            const auto a = fourier_components(h_t, h_v, rep.fundamental_hz, orders);
            rep.harmonic_1 = a[0];
            rep.harmonic_3 = a[1];
            rep.harmonic_ratio = a[1] / a[0];
        } catch (const std::invalid_argument&) {
            // window too short for a harmonic estimate
        }
    }
    return out;
}

// ---------------------------------------------------------------- report

double finite_mean(const std::vector<double>& v) {
    double s = 0.0;
    int n = 0;
    for (double x : v) {
        if (std::isfinite(x)) {
            s += x;
            ++n;
        }
    }
    return n ? s / n : kNaN;
}

void summarize(const Scenario& sc, const std::vector<TraceRow>& rows,
               const std::vector<double>& balance, RunReport& rep) {
    rep.model = sc.model;
    const auto b = sc.segment_boundaries();
    const std::size_t n = sc.inverters.size();
    const Dispatcher lookup(sc.dispatch, sc.inverters[0].params);

    rep.margin_min = kNaN;
    for (const auto& r : rows) {
        if (std::isfinite(r.margin) && !(r.margin >= rep.margin_min)) rep.margin_min = r.margin;
    }

    for (std::size_t s = 0; s + 1 < b.size(); ++s) {
        SegmentSummary seg;
        seg.t_begin = b[s];
        seg.t_end = b[s + 1];
        const double window = std::min(1.0, 0.25 * (seg.t_end - seg.t_begin));
        seg.window_begin = seg.t_end - window;
        const bool last = s + 2 == b.size();
        std::vector<std::vector<double>> cols(7 * n + 2);
        seg.margin_min = kNaN;
        for (const auto& r : rows) {
            const bool inside = r.t >= seg.window_begin - 1e-12 &&
                                (last ? r.t <= seg.t_end + 1e-12 : r.t < seg.t_end - 1e-12);
            if (!inside) continue;
            for (std::size_t j = 0; j < n; ++j) {
                const auto& q = r.inverters[j];
                const double f[] = {q.V_rms, q.theta, q.freq_hz, q.P, q.Q, q.k_v, q.k_i};
                for (int c = 0; c < 7; ++c) cols[7 * j + c].push_back(f[c]);
            }
            cols[7 * n].push_back(r.load_P);
            cols[7 * n + 1].push_back(r.load_Q);
            if (std::isfinite(r.margin) && !(r.margin >= seg.margin_min)) seg.margin_min = r.margin;
        }
        for (std::size_t j = 0; j < n; ++j) {
            seg.mean.push_back({finite_mean(cols[7 * j]), finite_mean(cols[7 * j + 1]),
                                finite_mean(cols[7 * j + 2]), finite_mean(cols[7 * j + 3]),
                                finite_mean(cols[7 * j + 4]), finite_mean(cols[7 * j + 5]),
                                finite_mean(cols[7 * j + 6])});
        }
        seg.load_P = finite_mean(cols[7 * n]);
        seg.load_Q = finite_mean(cols[7 * n + 1]);
        const double mid = 0.5 * (seg.t_begin + seg.t_end);
        if (const Setpoint* spt = lookup.active(mid, 0.0)) seg.setpoint = *spt;
        seg.balance_residual = s < balance.size() ? balance[s] : kNaN;
        rep.segments.push_back(std::move(seg));
    }

    rep.V_final = rep.segments.empty() ? kNaN : rep.segments.back().mean[0].V_rms;
    rep.rise_time_s = kNaN;
    if (!rows.empty() && std::isfinite(rep.V_final) &&
        rows.front().inverters[0].V_rms < 0.1 * rep.V_final) {
        auto crossing = [&](double level) {
            for (std::size_t i = 1; i < rows.size(); ++i) {
                const double a = rows[i - 1].inverters[0].V_rms;
                const double c = rows[i].inverters[0].V_rms;
                if (a < level && c >= level) {
                    return rows[i - 1].t + (rows[i].t - rows[i - 1].t) * (level - a) / (c - a);
                }
            }
            return kNaN;
        };
        rep.rise_time_s = crossing(0.9 * rep.V_final) - crossing(0.1 * rep.V_final);
    }
}

}  // namespace

RunResult run(const Scenario& scenario) {
    scenario.validate();
    RunResult result;
    if (scenario.duration_s == 0.0) {
        result.report.model = scenario.model;
        result.report.dt = scenario.step();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        result.report.rise_time_s = result.report.V_final = result.report.fundamental_hz = nan;
        result.report.harmonic_1 = result.report.harmonic_3 = result.report.harmonic_ratio = nan;
        result.report.kcl_residual_max = result.report.margin_min = nan;
        return result;
    }
    if (scenario.model == Model::actual) {
        auto r = run_actual(scenario);
        result.trace = std::move(r.rows);
        result.report = std::move(r.report);
        summarize(scenario, result.trace, {}, result.report);
    } else {
        auto r = run_averaged(scenario);
        result.trace = std::move(r.rows);
        result.report = std::move(r.report);
        summarize(scenario, result.trace, r.balance, result.report);
    }
    return result;
}

}  // namespace voc
