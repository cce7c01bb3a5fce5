#include "voc_cli/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "voc/config.hpp"
#include "voc/design.hpp"
#include "voc/dispatch.hpp"
#include "voc/errors.hpp"
#include "voc/simulation.hpp"
#include "voc/trace.hpp"

namespace voc::cli {
namespace {

constexpr const char* kDecimationEnv = "VOC_TRACE_DECIMATION_S";

struct Options {
    std::string scenario;
    std::string out;
    std::string report;
    std::string model;
    std::string mode;
    std::string c_rule;
    double dt = 0.0;
    std::optional<double> duration;
    // droop
    std::string axis = "P";
    double fixed = 0.0;
    double span = 0.0;
    int points = 21;
    // check-setpoint
    double p = 0.0;
    double q = 0.0;
};

ScenarioDocument load_document(const Options& o) {
    ScenarioDocument doc = o.scenario.empty() ? reference_document()
                                              : load_scenario_document(o.scenario);
    if (!o.mode.empty()) doc.mode = parse_smax_mode(o.mode);
    if (!o.c_rule.empty()) doc.c_rule = parse_capacitance_rule(o.c_rule);
    if (!o.model.empty()) doc.model = parse_model(o.model);
    if (o.dt > 0.0) doc.dt_s = o.dt;
    if (o.duration) doc.duration_s = *o.duration;
    if (const char* env = std::getenv(kDecimationEnv); env && *env) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(v > 0.0)) {
            throw ConfigError(fmt::format("{}='{}' is not a positive number of seconds",
                                          kDecimationEnv, env));
        }
        doc.trace_interval_s = v;
    }
    return doc;
}

// Opens --out (or falls back to the given stream when empty / "-").
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw Error("cannot open '" + path + "' for writing");
            os_ = file_.get();
        }
    }
    std::ostream& operator*() { return *os_; }
    bool is_file() const { return file_ != nullptr; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

void write_report(const Options& o, const std::string& json, std::ostream& out, bool trace_on_out) {
    if (!o.report.empty()) {
        std::ofstream f(o.report);
        if (!f) throw Error("cannot open '" + o.report + "' for writing");
        f << json << '\n';
    } else if (trace_on_out) {
        out << json << '\n';
    }
}

int cmd_design(const Options& o, std::ostream& out, std::ostream& err) {
    const auto doc = load_document(o);
    const auto r = design_for(doc);
    Sink sink(o.out, out);
    *sink << design_report_json(r) << '\n';
    if (!r.feasible) {
        std::string names;
        for (const auto& b : r.window.binding) names += (names.empty() ? "" : ", ") + b;
        err << fmt::format("design infeasible: capacitance window is empty ({})\n", names);
        return kExitInfeasible;
    }
    return kExitOk;
}

int cmd_droop(const Options& o, std::ostream& out, std::ostream&) {
    const auto doc = load_document(o);
    const auto r = design_for(doc);
    SweepAxis axis;
    if (o.axis == "P" || o.axis == "p") {
        axis = SweepAxis::P;
    } else if (o.axis == "Q" || o.axis == "q") {
        axis = SweepAxis::Q;
    } else {
        throw ConfigError("--axis must be P or Q, got '" + o.axis + "'");
    }
    const double span = o.span > 0.0 ? o.span
                                      : (axis == SweepAxis::P ? doc.spec.P_rated : doc.spec.Q_rated);
    const auto rows = droop_curve(r.params, r.constants, axis, o.fixed, span, o.points);
    Sink sink(o.out, out);
    *sink << (axis == SweepAxis::P ? "P_W" : "Q_var") << ",V_eq_V,omega_eq_rad_per_s,freq_hz,feasible\n";
    for (const auto& row : rows) {
        *sink << fmt::format("{},{},{},{},{}\n", format_value(row.swept), format_value(row.V_eq),
                             format_value(row.omega_eq),
                             format_value(row.omega_eq / (2.0 * std::numbers::pi)),
                             row.feasible ? 1 : 0);
    }
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
    const auto doc = load_document(o);
    const auto sc = build_scenario(doc);
    const auto res = run(sc);
    Sink sink(o.out, out);
    write_csv(*sink, res.trace, sc.inverters.size());
    write_report(o, run_report_json(res.report), out, sink.is_file());
    return kExitOk;
}

// Rows keyed by their index on the trace grid so that models with different steps align.
std::map<long long, const TraceRow*> index_rows(const std::vector<TraceRow>& rows, double interval) {
    std::map<long long, const TraceRow*> m;
    for (const auto& r : rows) {
        const double k = r.t / interval;
        const long long ki = std::llround(k);
        if (std::abs(k - static_cast<double>(ki)) < 1e-6) m.emplace(ki, &r);
    }
    return m;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
    auto doc = load_document(o);
    const std::vector<Model> models{Model::actual, Model::averaged, Model::legacy};
    std::vector<std::future<RunResult>> jobs;
    std::vector<Scenario> scenarios;
    for (Model m : models) {
        doc.model = m;
        // one dt only applies to the model it was meant for
        if (o.dt > 0.0 && !o.model.empty() && parse_model(o.model) != m) doc.dt_s = 0.0;
        scenarios.push_back(build_scenario(doc));
        doc.dt_s = o.dt;
    }
    for (const auto& sc : scenarios) {
        jobs.push_back(std::async(std::launch::async, [&sc] { return run(sc); }));
    }
    std::vector<RunResult> results;
    for (auto& j : jobs) results.push_back(j.get());

    const std::size_t n = scenarios.front().inverters.size();
    const double interval = scenarios.front().trace_interval_s;
    std::vector<std::map<long long, const TraceRow*>> idx;
    for (const auto& r : results) idx.push_back(index_rows(r.trace, interval));

    Sink sink(o.out, out);
    std::string header = "t_s";
    for (Model m : models) {
        for (const auto& c : csv_columns(n, std::string(to_string(m)) + "_")) header += "," + c;
    }
    *sink << header << '\n';

    double dv_avg = 0.0, dv_leg = 0.0, dp_avg = 0.0, dp_leg = 0.0;
    long long counted = 0;
    for (const auto& [k, row] : idx[0]) {
        const auto b = idx[1].find(k), c = idx[2].find(k);
        if (b == idx[1].end() || c == idx[2].end()) continue;
        std::string line = fmt::format("{:.6f}", static_cast<double>(k) * interval);
        for (const TraceRow* r : {row, b->second, c->second}) {
            for (double v : row_values(*r)) line += "," + format_value(v);
        }
        *sink << line << '\n';
        if (row->t + 1e-12 >= doc.comparison_window_start_s) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& a = row->inverters[i];
                dv_avg += std::abs(a.V_rms - b->second->inverters[i].V_rms);
                dv_leg += std::abs(a.V_rms - c->second->inverters[i].V_rms);
                dp_avg += std::abs(a.P - b->second->inverters[i].P);
                dp_leg += std::abs(a.P - c->second->inverters[i].P);
            }
            ++counted;
        }
    }
    const double denom = counted > 0 ? static_cast<double>(counted * static_cast<long long>(n)) : NAN;
    nlohmann::json summary = {
        {"schema_version", kSchemaVersion},
        {"window_start_s", doc.comparison_window_start_s},
        {"rows_compared", counted},
        {"mean_abs_dV_averaged_V", dv_avg / denom},
        {"mean_abs_dV_legacy_V", dv_leg / denom},
        {"mean_abs_dP_averaged_W", dp_avg / denom},
        {"mean_abs_dP_legacy_W", dp_leg / denom},
    };
    for (auto& [key, value] : summary.items()) {
        if (value.is_number_float() && !std::isfinite(value.get<double>())) value = nullptr;
    }
    write_report(o, summary.dump(2), out, sink.is_file());
    return kExitOk;
}

// Every setpoint must admit a positive-margin steady state before the run starts.
bool precheck_schedule(const ScenarioDocument& doc, std::ostream& err) {
    const auto sys = build_dispatch_system(doc);
    bool ok = true;
    for (const auto& sp : doc.dispatch->schedule) {
        try {
            const auto eq = dispatch_equilibrium({sp.P_star, sp.Q_star}, sys);
            if (!eq.achievable) {
                err << fmt::format("setpoint P={} W Q={} var at t={} s is infeasible (margin {:.6g})\n",
                                   sp.P_star, sp.Q_star, sp.t_start, eq.margin);
                ok = false;
            }
        } catch (const ConvergenceError& e) {
            err << fmt::format("setpoint P={} W Q={} var at t={} s has no steady state: {}\n",
                               sp.P_star, sp.Q_star, sp.t_start, e.what());
            ok = false;
        }
    }
    return ok;
}

int cmd_dispatch(const Options& o, std::ostream& out, std::ostream& err) {
    auto doc = load_document(o);
    if (!doc.dispatch) {
        // a scenario without a schedule gets the reference one
        doc.dispatch = reference_document().dispatch;
    }
    if (!precheck_schedule(doc, err)) return kExitInfeasible;
    const auto sc = build_scenario(doc);
    const auto res = run(sc);
    Sink sink(o.out, out);
    write_csv(*sink, res.trace, sc.inverters.size());
    write_report(o, run_report_json(res.report), out, sink.is_file());
    return kExitOk;
}

int cmd_check_setpoint(const Options& o, std::ostream& out, std::ostream& err) {
    const auto doc = load_document(o);
    const auto sys = build_dispatch_system(doc);
    const PowerPair sp{o.p, o.q};
    try {
        const auto eq = dispatch_equilibrium(sp, sys);
        out << dispatch_equilibrium_json(sp, eq) << '\n';
        if (!eq.achievable) {
            err << fmt::format("setpoint infeasible: security margin {:.6g}\n", eq.margin);
            return kExitInfeasible;
        }
        return kExitOk;
    } catch (const ConvergenceError& e) {
        nlohmann::json j = {{"schema_version", kSchemaVersion},
                            {"P_star_watt", o.p},
                            {"Q_star_var", o.q},
                            {"converged", false},
                            {"achievable", false},
                            {"iterations", e.iterations()},
                            {"residual", e.residual()}};
        out << j.dump(2) << '\n';
        err << "setpoint infeasible: " << e.what() << '\n';
        return kExitInfeasible;
    }
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--scenario", o.scenario, "Scenario document (JSON); default: reference system");
    sub->add_option("--mode", o.mode, "S_max evaluation: disc | rated_point")
        ->check(CLI::IsMember({"disc", "rated_point"}));
    sub->add_option("--c-rule", o.c_rule, "Capacitance choice: max | min | midpoint")
        ->check(CLI::IsMember({"max", "min", "midpoint"}));
}

void add_run_options(CLI::App* sub, Options& o) {
    sub->add_option("--out", o.out, "CSV trace file ('-' or absent: stdout)");
    sub->add_option("--report", o.report, "Write the JSON run report here");
    sub->add_option("--model", o.model, "actual | averaged | legacy")
        ->check(CLI::IsMember({"actual", "averaged", "legacy"}));
    sub->add_option("--dt", o.dt, "Integration step in seconds")->check(CLI::PositiveNumber);
    sub->add_option("--duration", o.duration, "Override the simulated duration in seconds")
        ->check(CLI::NonNegativeNumber);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Virtual-oscillator inverter design and simulation"};
    app.name("voc");
    app.require_subcommand(1);
    Options o;

    auto* design = app.add_subcommand("design", "Design oscillator parameters from AC specs");
    add_common(design, o);
    design->add_option("--out", o.out, "Write the JSON report here instead of stdout");

    auto* droop = app.add_subcommand("droop", "Tabulate the embedded droop characteristics");
    add_common(droop, o);
    droop->add_option("--out", o.out, "CSV output file");
    droop->add_option("--axis", o.axis, "Swept quantity: P or Q");
    droop->add_option("--fixed", o.fixed, "Value of the other quantity");
    droop->add_option("--span", o.span, "Sweep from 0 to this value (default: rating)");
    droop->add_option("--points", o.points, "Number of rows")->check(CLI::Range(2, 100000));

    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its trace");
    add_common(simulate, o);
    add_run_options(simulate, o);

    auto* compare = app.add_subcommand("compare", "Run all three models on one scenario");
    add_common(compare, o);
    add_run_options(compare, o);

    auto* dispatch = app.add_subcommand("dispatch", "Run the power dispatch schedule");
    add_common(dispatch, o);
    add_run_options(dispatch, o);

    auto* check = app.add_subcommand("check-setpoint", "Steady state and margin for a setpoint");
    add_common(check, o);
    check->add_option("--p", o.p, "Active power setpoint, watt")->required();
    check->add_option("--q", o.q, "Reactive power setpoint, var")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "voc: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*design) return cmd_design(o, out, err);
        if (*droop) return cmd_droop(o, out, err);
        if (*simulate) return cmd_simulate(o, out, err);
        if (*compare) return cmd_compare(o, out, err);
        if (*dispatch) return cmd_dispatch(o, out, err);
        if (*check) return cmd_check_setpoint(o, out, err);
    } catch (const InfeasibleSetpoint& e) {
        err << "voc: " << e.what() << '\n';
        return kExitInfeasible;
    } catch (const SimulationAborted& e) {
        err << fmt::format("voc: simulation aborted at t={:.6f} s: {}\n", e.time(), e.what());
        return kExitError;
    } catch (const std::exception& e) {
        err << "voc: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace voc::cli
