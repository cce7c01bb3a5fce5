#include "voc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <nlohmann/json.hpp>
#include <sstream>

#include "voc/errors.hpp"
#include "voc/reference.hpp"

namespace voc {

using nlohmann::json;

namespace {

// Typed access to one JSON object, reporting failures with the field's pointer.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("", "expected an object");
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(fmt::format("{}{}: {}", path_.empty() ? "/" : path_,
                                      key.empty() ? "" : (path_.empty() ? "" : "/") + key, msg));
    }

    void allow(std::initializer_list<const char*> keys) const {
        for (const auto& [k, v] : j_.items()) {
            const bool known = std::any_of(keys.begin(), keys.end(),
                                           [&](const char* a) { return k == a; });
            if (!known) fail(k, "unknown field");
        }
    }

    bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) fail(key, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(key, "expected a finite number");
        return d;
    }

    double positive(const char* key, double fallback) const {
        const double d = number(key, fallback);
        if (!(d > 0.0)) fail(key, "must be positive");
        return d;
    }

    double non_negative(const char* key, double fallback) const {
        const double d = number(key, fallback);
        if (d < 0.0) fail(key, "must be >= 0");
        return d;
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    template <class F>
    auto parsed(const char* key, const std::string& fallback, F&& parse) const {
        try {
            return parse(text(key, fallback));
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
    }

    std::optional<Section> child(const char* key) const {
        if (!has(key)) return std::nullopt;
        return Section(j_.at(key), path_ + "/" + key);
    }

    std::vector<Section> array(const char* key) const {
        std::vector<Section> out;
        if (!has(key)) return out;
        const auto& v = j_.at(key);
        if (!v.is_array()) fail(key, "expected an array");
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.emplace_back(v[i], fmt::format("{}/{}/{}", path_, key, i));
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

LclFilter read_filter(const Section& s, LclFilter f) {
    s.allow({"R_f_ohm", "L_f_henry", "R_c_ohm", "C_f_farad", "R_g_ohm", "L_g_henry"});
    f.R_f = s.non_negative("R_f_ohm", f.R_f);
    f.L_f = s.positive("L_f_henry", f.L_f);
    f.R_c = s.non_negative("R_c_ohm", f.R_c);
    f.C_f = s.positive("C_f_farad", f.C_f);
    f.R_g = s.non_negative("R_g_ohm", f.R_g);
    f.L_g = s.positive("L_g_henry", f.L_g);
    return f;
}

SeriesRlBranch read_branch(const Section& s, SeriesRlBranch b, bool with_events = false) {
    if (with_events) {
        s.allow({"label", "R_ohm", "L_henry", "connect_s", "disconnect_s"});
    } else {
        s.allow({"label", "R_ohm", "L_henry"});
    }
    b.label = s.text("label", b.label);
    b.R = s.non_negative("R_ohm", b.R);
    b.L = s.positive("L_henry", b.L);
    return b;
}

VocParams read_params(const Section& s) {
    s.allow({"sigma_siemens", "alpha_amp_per_volt3", "L_henry", "C_farad", "k_v", "k_i"});
    for (const char* k : {"sigma_siemens", "alpha_amp_per_volt3", "L_henry", "C_farad", "k_v",
                          "k_i"}) {
        if (!s.has(k)) s.fail(k, "required when explicit parameters are given");
    }
    VocParams p;
    p.sigma = s.positive("sigma_siemens", 0.0);
    p.alpha = s.positive("alpha_amp_per_volt3", 0.0);
    p.L = s.positive("L_henry", 0.0);
    p.C = s.positive("C_farad", 0.0);
    p.k_v = s.positive("k_v", 0.0);
    p.k_i = s.positive("k_i", 0.0);
    return p;
}

FeedbackTap parse_tap(const std::string& t) {
    if (t == "after_filter") return FeedbackTap::after_filter;
    if (t == "before_filter") return FeedbackTap::before_filter;
    throw ConfigError("expected after_filter or before_filter, got '" + t + "'");
}

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

SmaxMode parse_smax_mode(const std::string& text) {
    if (text == "rated_point") return SmaxMode::rated_point;
    if (text == "disc") return SmaxMode::disc;
    throw ConfigError("expected disc or rated_point, got '" + text + "'");
}

CapacitanceRule parse_capacitance_rule(const std::string& text) {
    if (text == "max") return CapacitanceRule::max;
    if (text == "min") return CapacitanceRule::min;
    if (text == "midpoint") return CapacitanceRule::midpoint;
    throw ConfigError("expected max, min or midpoint, got '" + text + "'");
}

ScenarioDocument reference_document() {
    ScenarioDocument d;
    d.name = "reference";
    d.spec = reference::ac_spec();
    d.filter = reference::filter();
    d.line = reference::line();
    d.inverters = {InverterDocument{}, InverterDocument{}};
    d.loads = {LoadSetup{reference::load()}};
    d.duration_s = reference::kDispatchDuration;
    DispatchSetup ds;
    ds.schedule = reference::dispatch_schedule();
    ds.gains = reference::pi_gains();
    d.dispatch = ds;
    return d;
}

ScenarioDocument parse_scenario_document(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}:{}: syntax error: {}", source,
                                      line_of(text, e.byte > 0 ? e.byte - 1 : 0), e.what()));
    }
    try {
        const Section root(j, "");
        root.allow({"schema_version", "name", "ac_spec", "filter", "line", "design", "inverters",
                    "loads", "simulation", "dispatch"});
        if (!root.has("schema_version")) root.fail("schema_version", "missing");
        const double version = root.number("schema_version", 0.0);
        if (version != kSchemaVersion) {
            root.fail("schema_version", fmt::format("unsupported version {} (expected {})",
                                                    version, kSchemaVersion));
        }

        ScenarioDocument d = reference_document();
        d.name = root.text("name", "scenario");
        d.dispatch.reset();
        if (auto s = root.child("ac_spec")) {
            s->allow({"V_oc_volt", "V_min_volt", "P_rated_watt", "Q_rated_var",
                      "omega_star_rad_per_s", "d_omega_max_rad_per_s", "t_rise_max_s",
                      "delta31_max"});
            auto& a = d.spec;
            a.V_oc = s->positive("V_oc_volt", a.V_oc);
            a.V_min = s->positive("V_min_volt", a.V_min);
            a.P_rated = s->positive("P_rated_watt", a.P_rated);
            a.Q_rated = s->positive("Q_rated_var", a.Q_rated);
            a.omega_star = s->positive("omega_star_rad_per_s", a.omega_star);
            a.d_omega_max = s->positive("d_omega_max_rad_per_s", a.d_omega_max);
            a.t_rise_max = s->positive("t_rise_max_s", a.t_rise_max);
            a.delta31_max = s->positive("delta31_max", a.delta31_max);
            if (!(a.V_min < a.V_oc)) s->fail("V_min_volt", "must be below V_oc_volt");
        }
        if (auto s = root.child("filter")) d.filter = read_filter(*s, d.filter);
        if (auto s = root.child("line")) d.line = read_branch(*s, d.line);
        if (auto s = root.child("design")) {
            s->allow({"mode", "c_rule", "epsilon_scale"});
            d.mode = s->parsed("mode", "rated_point", parse_smax_mode);
            d.c_rule = s->parsed("c_rule", "max", parse_capacitance_rule);
            d.epsilon_scale = s->positive("epsilon_scale", 1.0);
        }
        if (root.has("inverters")) {
            d.inverters.clear();
            for (const auto& s : root.array("inverters")) {
                s.allow({"params", "filter", "line", "V0_volt", "theta0_rad"});
                InverterDocument inv;
                if (auto p = s.child("params")) inv.params = read_params(*p);
                if (auto f = s.child("filter")) inv.filter = read_filter(*f, d.filter);
                if (auto l = s.child("line")) inv.line = read_branch(*l, d.line);
                inv.V0 = s.has("V0_volt") ? s.positive("V0_volt", 0.0) : inv.V0;
                inv.theta0 = s.number("theta0_rad", 0.0);
                d.inverters.push_back(inv);
            }
            if (d.inverters.empty() || d.inverters.size() > 2) {
                root.fail("inverters", "one or two inverters are supported");
            }
        }
        if (root.has("loads")) {
            d.loads.clear();
            for (const auto& s : root.array("loads")) {
                LoadSetup l;
                l.branch = read_branch(s, SeriesRlBranch{0.0, 0.0, "load"}, true);
                if (!s.has("L_henry")) s.fail("L_henry", "missing");
                l.connect_s = s.non_negative("connect_s", 0.0);
                l.disconnect_s = s.number("disconnect_s", l.disconnect_s);
                if (!(l.disconnect_s > l.connect_s)) s.fail("disconnect_s", "must follow connect_s");
                d.loads.push_back(l);
            }
        }
        if (auto s = root.child("simulation")) {
            s->allow({"model", "duration_s", "dt_s", "trace_interval_s", "feedback_tap",
                      "harmonic_window_s", "comparison_window_start_s"});
            d.model = s->parsed("model", "averaged", parse_model);
            d.duration_s = s->non_negative("duration_s", d.duration_s);
            d.dt_s = s->has("dt_s") ? s->positive("dt_s", 0.0) : 0.0;
            d.trace_interval_s = s->positive("trace_interval_s", d.trace_interval_s);
            d.feedback_tap = s->parsed("feedback_tap", "after_filter", parse_tap);
            d.harmonic_window_s = s->positive("harmonic_window_s", d.harmonic_window_s);
            d.comparison_window_start_s =
                s->non_negative("comparison_window_start_s", d.comparison_window_start_s);
        }
        if (auto s = root.child("dispatch")) {
            s->allow({"gains", "clamp_low", "clamp_high", "schedule"});
            DispatchSetup ds;
            ds.gains = reference::pi_gains();
            if (auto g = s->child("gains")) {
                g->allow({"Kp_p", "Ki_p", "Kp_q", "Ki_q"});
                ds.gains.Kp_p = g->number("Kp_p", ds.gains.Kp_p);
                ds.gains.Ki_p = g->number("Ki_p", ds.gains.Ki_p);
                ds.gains.Kp_q = g->number("Kp_q", ds.gains.Kp_q);
                ds.gains.Ki_q = g->number("Ki_q", ds.gains.Ki_q);
            }
            ds.clamp_low = s->positive("clamp_low", ds.clamp_low);
            ds.clamp_high = s->positive("clamp_high", ds.clamp_high);
            for (const auto& e : s->array("schedule")) {
                e.allow({"t_start_s", "P_star_watt", "Q_star_var"});
                for (const char* k : {"t_start_s", "P_star_watt", "Q_star_var"}) {
                    if (!e.has(k)) e.fail(k, "missing");
                }
                ds.schedule.push_back({e.number("P_star_watt", 0.0), e.number("Q_star_var", 0.0),
                                       e.non_negative("t_start_s", 0.0)});
            }
            d.dispatch = ds;
        }
        return d;
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", source, e.what()));
    }
}

ScenarioDocument load_scenario_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("{}: cannot open scenario file", path));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_document(ss.str(), path);
}

DesignReport design_for(const ScenarioDocument& doc) {
    try {
        return design(doc.spec, doc.filter, doc.mode, doc.c_rule);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(fmt::format("{}: {}", doc.name, e.what()));
    }
}

Scenario build_scenario(const ScenarioDocument& doc) {
    Scenario s;
    s.name = doc.name;
    s.model = doc.model;
    s.duration_s = doc.duration_s;
    s.dt_s = doc.dt_s;
    s.trace_interval_s = doc.trace_interval_s;
    s.feedback_tap = doc.feedback_tap;
    s.harmonic_window_s = doc.harmonic_window_s;
    s.loads = doc.loads;
    s.dispatch = doc.dispatch;
    std::optional<VocParams> designed;
    for (const auto& inv : doc.inverters) {
        InverterSetup setup;
        setup.branch = {inv.filter.value_or(doc.filter), inv.line.value_or(doc.line)};
        if (inv.params) {
            setup.params = *inv.params;
        } else {
            if (!designed) designed = design_for(doc).params.with_epsilon_scaled(doc.epsilon_scale);
            setup.params = *designed;
        }
        setup.V0 = inv.V0;
        setup.theta0 = inv.theta0;
        s.inverters.push_back(setup);
    }
    return s;
}

DispatchSystem build_dispatch_system(const ScenarioDocument& doc) {
    const Scenario s = build_scenario(doc);
    if (s.inverters.size() != 2) {
        throw ConfigError(fmt::format("{}: dispatch needs exactly two inverters", doc.name));
    }
    DispatchSystem sys;
    sys.params1 = s.inverters[0].params;
    sys.params2 = s.inverters[1].params;
    sys.branch1 = s.inverters[0].branch;
    sys.branch2 = s.inverters[1].branch;
    sys.k1 = impedance_constants(sys.branch1.filter, sys.params1.omega_star());
    sys.k2 = impedance_constants(sys.branch2.filter, sys.params2.omega_star());
    for (const auto& l : s.loads) {
        if (l.connect_s <= 0.0 && std::isinf(l.disconnect_s)) sys.loads.push_back(l.branch);
    }
    if (sys.loads.empty()) {
        throw ConfigError(fmt::format("{}: dispatch needs a permanently connected load", doc.name));
    }
    sys.omega = sys.params1.omega_star();
    return sys;
}

std::string design_report_json(const DesignReport& r) {
    json j;
    const auto& p = r.params;
    j["feasible"] = r.feasible;
    j["c_rule"] = to_string(r.rule);
    j["params"] = {{"sigma_siemens", p.sigma}, {"alpha_amp_per_volt3", p.alpha},
                   {"L_henry", p.L},           {"C_farad", p.C},
                   {"k_v", p.k_v},             {"k_i", p.k_i},
                   {"omega_star_rad_per_s", p.omega_star()}, {"epsilon_ohm", p.epsilon()}};
    j["impedance_constants"] = {{"C_alpha", r.constants.C_alpha},
                                {"S_alpha", r.constants.S_alpha},
                                {"C_beta_siemens", r.constants.C_beta},
                                {"S_beta_siemens", r.constants.S_beta}};
    j["S_max"] = r.S_max;
    j["S_domega_max"] = r.S_domega_max;
    j["capacitance_window_farad"] = {{"C_min_freq", r.window.C_min_freq},
                                     {"C_min_harm", r.window.C_min_harm},
                                     {"C_max_rise", r.window.C_max_rise}};
    j["binding_constraints"] = r.window.binding;
    return j.dump(2);
}

std::string run_report_json(const RunReport& r) {
    json j;
    j["model"] = to_string(r.model);
    j["dt_s"] = r.dt;
    j["steps"] = r.steps;
    j["rise_time_s"] = number_or_null(r.rise_time_s);
    j["V_final_volt"] = number_or_null(r.V_final);
    j["fundamental_hz"] = number_or_null(r.fundamental_hz);
    j["harmonic_1_volt"] = number_or_null(r.harmonic_1);
    j["harmonic_3_volt"] = number_or_null(r.harmonic_3);
    j["harmonic_ratio"] = number_or_null(r.harmonic_ratio);
    j["kcl_residual_max_amp"] = number_or_null(r.kcl_residual_max);
    j["margin_min"] = number_or_null(r.margin_min);
    json segs = json::array();
    for (const auto& s : r.segments) {
        json js;
        js["t_begin_s"] = s.t_begin;
        js["t_end_s"] = s.t_end;
        js["window_begin_s"] = s.window_begin;
        json inv = json::array();
        for (const auto& m : s.mean) {
            inv.push_back({{"V_rms_volt", number_or_null(m.V_rms)},
                           {"freq_hz", number_or_null(m.freq_hz)},
                           {"P_watt", number_or_null(m.P)},
                           {"Q_var", number_or_null(m.Q)},
                           {"k_v", number_or_null(m.k_v)},
                           {"k_i", number_or_null(m.k_i)}});
        }
        js["inverters"] = inv;
        js["load_P_watt"] = number_or_null(s.load_P);
        js["load_Q_var"] = number_or_null(s.load_Q);
        js["margin_min"] = number_or_null(s.margin_min);
        js["balance_residual"] = number_or_null(s.balance_residual);
        if (s.setpoint) {
            js["setpoint"] = {{"P_star_watt", s.setpoint->P_star},
                              {"Q_star_var", s.setpoint->Q_star}};
        }
        segs.push_back(js);
    }
    j["segments"] = segs;
    return j.dump(2);
}

std::string dispatch_equilibrium_json(PowerPair sp, const DispatchEquilibrium& eq) {
    json j;
    j["P_star_watt"] = sp.P;
    j["Q_star_var"] = sp.Q;
    j["achievable"] = eq.achievable;
    j["margin"] = eq.margin;
    j["mu"] = eq.mu;
    j["k_v1"] = number_or_null(eq.kv1);
    j["k_i1"] = number_or_null(eq.ki1);
    j["V1_volt"] = eq.V1;
    j["theta1_rad"] = eq.theta1;
    j["V2_volt"] = eq.V2;
    j["P2_watt"] = eq.P2;
    j["Q2_var"] = eq.Q2;
    j["freq_hz"] = eq.omega / (2.0 * std::numbers::pi);
    j["newton_iterations"] = eq.iterations;
    return j.dump(2);
}

}  // namespace voc
