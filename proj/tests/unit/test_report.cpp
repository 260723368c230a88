#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mocc/report.hpp"

using namespace mocc;

namespace {

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

std::size_t fields(const std::string& line) { return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1; }

std::string table(const PerformanceReport& r) {
    std::ostringstream os;
    write_table_csv(os, r);
    return os.str();
}

std::string json_text(const PerformanceReport& r) {
    std::ostringstream os;
    write_report_json(os, r);
    return os.str();
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

ScenarioConfig short_scenario() {
    ScenarioConfig cfg = load_config(std::string(MOCC_SOURCE_DIR) + "/configs/double_integrator.cfg");
    cfg.sim.T = 2.0;
    cfg.sim.h = 1e-3;
    return cfg;
}

}  // namespace

TEST_CASE("empty report has only the header") {
    PerformanceReport r;
    r.controllers = {ControllerKind::mocc, ControllerKind::hinf, ControllerKind::lqt, ControllerKind::dobc};
    CHECK(table(r) == "label,MOCC,Hinf,LQT,DOBC\n");
    std::ostringstream os;
    write_cells_csv(os, r);
    CHECK(lines(os.str()).size() == 1);
    const auto j = nlohmann::json::parse(json_text(r));
    CHECK(j["cells"].empty());
    CHECK(j["complete"] == true);
}

TEST_CASE("failed cells stay empty and mark the report incomplete") {
    PerformanceReport r;
    r.controllers = {ControllerKind::lqt};
    r.rows = {"w, quoted"};
    BenchmarkCell c;
    c.controller = ControllerKind::lqt;
    c.row = "w, quoted";
    c.error = "closed loop is not stable";
    r.cells.push_back(c);
    CHECK_FALSE(r.complete());
    CHECK(table(r) == "label,LQT\n\"w, quoted\",\n");
    CHECK(c.id() == "lqt_w__quoted");
    const auto j = nlohmann::json::parse(json_text(r));
    CHECK(j["cells"][0]["value"].is_null());
    CHECK(j["cells"][0]["error"] == "closed loop is not stable");
}

TEST_CASE("benchmark table layout, bands and determinism") {
    const ScenarioConfig cfg = short_scenario();
    BenchmarkOptions serial;
    serial.workers = 1;
    BenchmarkOptions pooled;
    pooled.workers = 3;
    const PerformanceReport a = run_benchmark(cfg, serial);
    const PerformanceReport b = run_benchmark(cfg, pooled);
    REQUIRE(a.complete());

    const auto t = lines(table(a));
    REQUIRE(t.size() == 6);  // header plus 4 disturbances and the norm row
    for (const auto& l : t) CHECK(fields(l) == 5);
    CHECK(t[0] == "label,MOCC,Hinf,LQT,DOBC");
    CHECK(t[5].rfind("hinf_norm,", 0) == 0);

    // Scheduling must not change a single byte.
    CHECK(table(a) == table(b));
    CHECK(json_text(a) == json_text(b));

    const auto j = nlohmann::json::parse(json_text(a));
    REQUIRE(j["cells"].size() == 20);
    for (const auto& cell : j["cells"]) {
        REQUIRE(cell.contains("expected"));
        const auto& e = cell["expected"];
        CHECK(e["lower"].get<double>() <= e["value"].get<double>());
        CHECK(e["upper"].get<double>() >= e["value"].get<double>());
        CHECK((e["tolerance_kind"] == "relative" || e["tolerance_kind"] == "absolute"));
    }
    CHECK(j["cells"][1]["expected"]["indicative"] == true);  // Hinf column

    const auto dir = std::filesystem::temp_directory_path() / "mocc_report_test";
    std::filesystem::remove_all(dir);
    emit_report((dir / "a").string(), a);
    emit_report((dir / "b").string(), b);
    for (const char* f : {"report.csv", "cells.csv", "report.json"}) {
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
        CHECK_FALSE(slurp(dir / "a" / f).empty());
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("synthesis failure fails every cell") {
    ScenarioConfig cfg = short_scenario();
    cfg.gamma = 0.2;
    cfg.expected.clear();
    const PerformanceReport r = run_benchmark(cfg);
    CHECK_FALSE(r.complete());
    CHECK_FALSE(r.synthesis_error.empty());
    for (const auto& c : r.cells) CHECK(c.error.rfind("synthesis", 0) == 0);
    CHECK(lines(table(r))[1] == "w0,,,,");
}
