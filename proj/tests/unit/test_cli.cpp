#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "catch2/catch_amalgamated.hpp"
#include "voc_cli/cli.hpp"

using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result voc_run(std::initializer_list<std::string> args) {
    std::vector<std::string> storage{"voc"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = voc::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string scenario(const char* name) { return std::string(VOC_SCENARIO_DIR) + "/" + name; }

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("voc_cli_test_" + name);
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

}  // namespace

TEST_CASE("design prints the parameter table", "[cli]") {
    const auto r = voc_run({"design", "--scenario", scenario("reference_design.json")});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["params"]["k_v"].get<double>() == 126.0);
    CHECK(j["params"]["k_i"].get<double>() == Approx(0.15225).margin(1e-4));
    CHECK(j["params"]["C_farad"].get<double>() == Approx(0.203).margin(1e-3));
    CHECK(j["feasible"].get<bool>());
}

TEST_CASE("design flags and infeasible designs", "[cli]") {
    const auto disc = voc_run({"design", "--mode", "disc"});
    REQUIRE(disc.code == 0);
    CHECK(nlohmann::json::parse(disc.out)["params"]["k_i"].get<double>() == Approx(0.1077).margin(1e-4));
    const auto mid = voc_run({"design", "--c-rule", "midpoint"});
    CHECK(mid.code == 0);
    CHECK(nlohmann::json::parse(mid.out)["c_rule"] == "midpoint");
    CHECK(voc_run({"design", "--scenario", scenario("comparison.json")}).code == 2);
    CHECK(voc_run({"design", "--mode", "square"}).code == 1);
}

TEST_CASE("check-setpoint", "[cli]") {
    const auto ok = voc_run({"check-setpoint", "--p", "500", "--q", "83"});
    REQUIRE(ok.code == 0);
    const auto j = nlohmann::json::parse(ok.out);
    CHECK(j["achievable"].get<bool>());
    CHECK(j["margin"].get<double>() > 0.0);

    const auto bad = voc_run({"check-setpoint", "--p", "2000", "--q", "83"});
    CHECK(bad.code == 2);
    CHECK_FALSE(nlohmann::json::parse(bad.out)["achievable"].get<bool>());
    CHECK(voc_run({"check-setpoint", "--p", "1e5", "--q", "83"}).code == 2);
    CHECK(voc_run({"check-setpoint", "--p", "500"}).code == 1);
}

TEST_CASE("simulate with zero duration writes only the header", "[cli]") {
    const auto path = temp_file("empty.csv");
    const auto r = voc_run({"simulate", "--duration", "0", "--out", path.string()});
    REQUIRE(r.code == 0);
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto lines = lines_of(ss.str());
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].rfind("t_s,inv1_V_rms_V,", 0) == 0);
    std::filesystem::remove(path);
}

TEST_CASE("simulate honours the decimation override and the model flag", "[cli]") {
    ::setenv("VOC_TRACE_DECIMATION_S", "0.01", 1);
    const auto r = voc_run({"simulate", "--scenario", scenario("reference_design.json"), "--model",
                            "legacy", "--duration", "0.2"});
    ::unsetenv("VOC_TRACE_DECIMATION_S");
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 22);
    CHECK(lines[1].rfind("0.000000,", 0) == 0);
    CHECK(lines[2].rfind("0.010000,", 0) == 0);

    ::setenv("VOC_TRACE_DECIMATION_S", "-3", 1);
    CHECK(voc_run({"simulate", "--duration", "0.1"}).code == 1);
    ::unsetenv("VOC_TRACE_DECIMATION_S");
}

TEST_CASE("simulate output is byte-identical across runs", "[cli]") {
    const auto a = voc_run({"simulate", "--scenario", scenario("rise_time.json"), "--duration", "0.05"});
    const auto b = voc_run({"simulate", "--scenario", scenario("rise_time.json"), "--duration", "0.05"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("compare aligns the three models", "[cli]") {
    const auto path = temp_file("compare.csv");
    const auto r = voc_run({"compare", "--scenario", scenario("comparison.json"), "--duration",
                            "4.5", "--out", path.string()});
    REQUIRE(r.code == 0);
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    const auto lines = lines_of(ss.str());
    REQUIRE(lines.size() == 4502);
    CHECK_THAT(lines[0], ContainsSubstring("actual_inv1_V_rms_V"));
    CHECK_THAT(lines[0], ContainsSubstring("averaged_inv2_P_W"));
    CHECK_THAT(lines[0], ContainsSubstring("legacy_margin"));
    CHECK(std::count(lines[5].begin(), lines[5].end(), ',') ==
          std::count(lines[0].begin(), lines[0].end(), ','));
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rows_compared"].get<long long>() == 1501);  // window starts at 3 s
    CHECK(j["mean_abs_dV_averaged_V"].get<double>() < j["mean_abs_dV_legacy_V"].get<double>());
    std::filesystem::remove(path);
}

TEST_CASE("dispatch refuses an infeasible schedule", "[cli]") {
    const auto path = temp_file("bad_dispatch.json");
    {
        std::ofstream f(path);
        f << R"({"schema_version": 1, "simulation": {"duration_s": 10},
                 "dispatch": {"schedule": [{"t_start_s": 1, "P_star_watt": 2000, "Q_star_var": 83}]}})";
    }
    const auto r = voc_run({"dispatch", "--scenario", path.string()});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring("infeasible"));
    std::filesystem::remove(path);
}

TEST_CASE("dispatch runs the reference schedule", "[cli]") {
    const auto report = temp_file("dispatch.json");
    const auto r = voc_run({"dispatch", "--scenario", scenario("dispatch.json"), "--out",
                            temp_file("dispatch.csv").string(), "--report", report.string()});
    REQUIRE(r.code == 0);
    std::ifstream f(report);
    const auto j = nlohmann::json::parse(f);
    CHECK(j["margin_min"].get<double>() > 0.0);
    CHECK(j["segments"].size() == 6);
    std::filesystem::remove(report);
    std::filesystem::remove(temp_file("dispatch.csv"));
}

TEST_CASE("droop table", "[cli]") {
    const auto r = voc_run({"droop", "--axis", "P", "--points", "5"});
    REQUIRE(r.code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "P_W,V_eq_V,omega_eq_rad_per_s,freq_hz,feasible");
    CHECK(voc_run({"droop", "--axis", "S"}).code == 1);
}

TEST_CASE("usage errors", "[cli]") {
    CHECK(voc_run({}).code == 1);
    CHECK(voc_run({"simulate", "--model", "exact"}).code == 1);
    CHECK(voc_run({"simulate", "--scenario", "/nonexistent.json"}).code == 1);
    CHECK(voc_run({"--help"}).code == 0);
}
