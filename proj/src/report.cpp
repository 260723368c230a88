#include "mocc/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace mocc {

namespace {

std::string num(double x) {
    std::ostringstream ss;
    ss << std::setprecision(17) << x;
    return ss.str();
}

// Quotes a CSV field only when it needs it.
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

const char* kind_name(ToleranceKind k) { return k == ToleranceKind::relative ? "relative" : "absolute"; }

double band(const ExpectedCell& e) {
    return e.kind == ToleranceKind::relative ? e.tolerance * std::abs(e.value) : e.tolerance;
}

void open_out(std::ofstream& os, const std::filesystem::path& p) {
    os.open(p, std::ios::binary);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
}

}  // namespace

const char* column_label(ControllerKind k) {
    switch (k) {
        case ControllerKind::mocc: return "MOCC";
        case ControllerKind::hinf: return "Hinf";
        case ControllerKind::lqt: return "LQT";
        case ControllerKind::dobc: return "DOBC";
    }
    return "?";
}

void write_table_csv(std::ostream& os, const PerformanceReport& rep) {
    os << "label";
    for (auto k : rep.controllers) os << ',' << column_label(k);
    os << '\n';
    for (const auto& row : rep.rows) {
        os << field(row);
        for (auto k : rep.controllers) {
            os << ',';
            const BenchmarkCell* c = rep.find(k, row);
            if (c && c->completed) os << num(c->value);
        }
        os << '\n';
    }
}

void write_cells_csv(std::ostream& os, const PerformanceReport& rep) {
    os << "cell,controller,row,kind,completed,value,steady_state,expected,tolerance_kind,tolerance,lower,upper,"
          "within,indicative,error\n";
    for (const auto& c : rep.cells) {
        os << c.id() << ',' << to_string(c.controller) << ',' << field(c.row) << ','
           << (c.kind == CellKind::cost ? "cost" : "hinf_norm") << ',' << (c.completed ? 1 : 0) << ',';
        if (c.completed) os << num(c.value);
        os << ',';
        if (c.steady_state) os << num(*c.steady_state);
        os << ',';
        if (c.expected) {
            const auto& e = *c.expected;
            os << num(e.value) << ',' << kind_name(e.kind) << ',' << num(e.tolerance) << ',' << num(e.value - band(e))
               << ',' << num(e.value + band(e)) << ',' << (*c.within() ? 1 : 0) << ',' << (e.indicative ? 1 : 0);
        } else {
            os << ",,,,,,";
        }
        os << ',' << field(c.error) << '\n';
    }
}

void write_report_json(std::ostream& os, const PerformanceReport& rep) {
    using json = nlohmann::ordered_json;
    json j;
    j["tool"] = tool_version();
    j["source"] = rep.source;
    j["h"] = rep.h;
    j["T"] = rep.T;
    j["gamma"] = rep.gamma;
    j["gamma_searched"] = rep.gamma_searched;
    j["alpha"] = rep.alpha;
    j["complete"] = rep.complete();
    if (!rep.synthesis_error.empty()) j["synthesis_error"] = rep.synthesis_error;
    json cols = json::array();
    for (auto k : rep.controllers) cols.push_back(to_string(k));
    j["controllers"] = cols;
    j["rows"] = rep.rows;
    json cells = json::array();
    for (const auto& c : rep.cells) {
        json e;
        e["cell"] = c.id();
        e["controller"] = to_string(c.controller);
        e["row"] = c.row;
        e["kind"] = c.kind == CellKind::cost ? "cost" : "hinf_norm";
        e["completed"] = c.completed;
        e["value"] = c.completed ? json(c.value) : json(nullptr);
        if (c.steady_state) e["steady_state"] = *c.steady_state;
        if (c.expected) {
            const auto& x = *c.expected;
            e["expected"] = {{"value", x.value},
                             {"tolerance_kind", kind_name(x.kind)},
                             {"tolerance", x.tolerance},
                             {"lower", x.value - band(x)},
                             {"upper", x.value + band(x)},
                             {"indicative", x.indicative},
                             {"within", *c.within()}};
        }
        if (!c.error.empty()) e["error"] = c.error;
        cells.push_back(std::move(e));
    }
    j["cells"] = cells;
    // nlohmann prints doubles with round-trip precision, so the JSON is exact.
    os << j.dump(2) << '\n';
}

void emit_report(const std::string& dir, const PerformanceReport& rep) {
    const std::filesystem::path d(dir);
    std::filesystem::create_directories(d);
    std::ofstream table, cells, json;
    open_out(table, d / "report.csv");
    write_table_csv(table, rep);
    open_out(cells, d / "cells.csv");
    write_cells_csv(cells, rep);
    open_out(json, d / "report.json");
    write_report_json(json, rep);
}

}  // namespace mocc
