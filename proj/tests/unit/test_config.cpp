#include <sstream>
#include <string>

#include "catch2/catch_amalgamated.hpp"
#include "voc/config.hpp"
#include "voc/errors.hpp"
#include "voc/reference.hpp"
#include "voc/trace.hpp"

using namespace voc;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {
std::string scenario_path(const char* name) { return std::string(VOC_SCENARIO_DIR) + "/" + name; }

void expect_error(const std::string& text, const std::string& fragment) {
    INFO(text);
    CHECK_THROWS_WITH(parse_scenario_document(text), ContainsSubstring(fragment));
}
}  // namespace

TEST_CASE("shipped scenarios load", "[config]") {
    for (const char* f : {"reference_design.json", "rise_time.json", "comparison.json",
                          "dispatch.json", "ideal_filter_droop.json"}) {
        INFO(f);
        CHECK_NOTHROW(build_scenario(load_scenario_document(scenario_path(f))).validate());
    }
}

TEST_CASE("reference design document reproduces the reference design", "[config]") {
    const auto doc = load_scenario_document(scenario_path("reference_design.json"));
    const auto a = design_for(doc).params;
    const auto b = reference::parameters();
    CHECK(a.k_i == Approx(b.k_i).epsilon(1e-14));
    CHECK(a.C == Approx(b.C).epsilon(1e-14));
    CHECK(a.sigma == Approx(b.sigma).epsilon(1e-14));
}

TEST_CASE("comparison document matches the built-in comparison scenario", "[config]") {
    const auto s = build_scenario(load_scenario_document(scenario_path("comparison.json")));
    const auto r = reference::comparison_scenario(Model::averaged);
    REQUIRE(s.inverters.size() == 2);
    CHECK(s.inverters[0].params.C == Approx(r.inverters[0].params.C).epsilon(1e-12));
    CHECK(s.inverters[0].params.L == Approx(r.inverters[0].params.L).epsilon(1e-12));
    CHECK(s.inverters[0].branch.filter.C_f == Approx(r.inverters[0].branch.filter.C_f));
    REQUIRE(s.loads.size() == 2);
    CHECK(s.loads[1].connect_s == 4.0);
    CHECK(s.loads[1].disconnect_s == 7.0);
    CHECK(s.loads[1].branch.L == Approx(r.loads[1].branch.L).epsilon(1e-12));
}

TEST_CASE("dispatch document matches the built-in schedule", "[config]") {
    const auto doc = load_scenario_document(scenario_path("dispatch.json"));
    REQUIRE(doc.dispatch);
    const auto ref = reference::dispatch_schedule();
    REQUIRE(doc.dispatch->schedule.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(doc.dispatch->schedule[i].P_star == ref[i].P_star);
        CHECK(doc.dispatch->schedule[i].Q_star == ref[i].Q_star);
        CHECK(doc.dispatch->schedule[i].t_start == ref[i].t_start);
    }
    CHECK(doc.dispatch->gains.Ki_p == -0.15);
}

TEST_CASE("minimal document takes reference defaults", "[config]") {
    const auto doc = parse_scenario_document(R"({"schema_version": 1})");
    CHECK(doc.spec.V_oc == 126.0);
    CHECK(doc.inverters.size() == 2);
    CHECK_FALSE(doc.dispatch.has_value());
}

TEST_CASE("malformed documents name the line or field", "[config]") {
    expect_error("{\n  \"schema_version\": 1,\n  \"name\": \n}", ":4:");
    expect_error(R"({"name": "x"})", "schema_version");
    expect_error(R"({"schema_version": 2})", "unsupported version");
    expect_error(R"({"schema_version": 1, "filtre": {}})", "filtre");
    expect_error(R"({"schema_version": 1, "filter": {"R_f_ohm": -1}})", "/filter/R_f_ohm");
    expect_error(R"({"schema_version": 1, "filter": {"L_f_henry": "big"}})", "/filter/L_f_henry");
    expect_error(R"({"schema_version": 1, "loads": [{"R_ohm": 1}]})", "/loads/0/L_henry");
    expect_error(R"({"schema_version": 1, "simulation": {"model": "exact"}})", "/simulation/model");
    expect_error(R"({"schema_version": 1, "ac_spec": {"V_min_volt": 130}})", "/ac_spec/V_min_volt");
    expect_error(R"({"schema_version": 1, "inverters": [{}, {}, {}]})", "inverters");
    expect_error(R"({"schema_version": 1, "dispatch": {"schedule": [{"t_start_s": 1, "P_star_watt": 1, "Q_star_var": 1, "extra": 0}]}})",
                 "/dispatch/schedule/0/extra");
    CHECK_THROWS_AS(load_scenario_document("/nonexistent/file.json"), ConfigError);
}

TEST_CASE("enum parsers", "[config]") {
    CHECK(parse_smax_mode("disc") == SmaxMode::disc);
    CHECK(parse_capacitance_rule("midpoint") == CapacitanceRule::midpoint);
    CHECK(parse_model("legacy") == Model::legacy);
    CHECK_THROWS_AS(parse_smax_mode("circle"), ConfigError);
    CHECK_THROWS_AS(parse_model("fast"), ConfigError);
}

TEST_CASE("CSV layout", "[trace]") {
    const auto cols = csv_columns(2);
    REQUIRE(cols.size() == 18);
    CHECK(cols[0] == "t_s");
    CHECK(cols[1] == "inv1_V_rms_V");
    CHECK(cols[7] == "inv1_ki");
    CHECK(cols[8] == "inv2_V_rms_V");
    CHECK(cols[15] == "load_P_W");
    CHECK(cols[17] == "margin");
    CHECK(format_value(std::nan("")) == "");
    CHECK(format_value(0.1) == "0.1");

    TraceRow row;
    row.t = 0.25;
    row.inverters = {InverterSample{120.0, 0.1, 60.0, 500.0, 83.0, 126.0, 0.15}};
    row.load_P = 480.0;
    row.load_Q = 70.0;
    row.margin = std::nan("");
    std::ostringstream os;
    write_csv(os, {row}, 1);
    CHECK(os.str() ==
          "t_s,inv1_V_rms_V,inv1_theta_rad,inv1_freq_hz,inv1_P_W,inv1_Q_var,inv1_kv,inv1_ki,"
          "load_P_W,load_Q_var,margin\n0.250000,120,0.1,60,500,83,126,0.15,480,70,\n");
}
