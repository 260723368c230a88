#pragma once

// Scenario orchestration: synthesize every requested controller once, then
// run each (controller, disturbance) cell and collect costs and norms.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mocc/config.hpp"
#include "mocc/youla.hpp"

namespace mocc {

/// Designs shared by all cells of a scenario.
struct ScenarioDesigns {
    double gamma = 0.0;
    bool gamma_searched = false;  // true when gamma came from the bisection
    LqtDesign lqt;
    HinfDesign hinf;
    CompositeController mocc;  // at the configured alpha
};

/// Throws when the LQ or H-infinity synthesis fails (every cell depends on them).
ScenarioDesigns synthesize_scenario(const ScenarioConfig& cfg);

/// Lowered controller for one kind. The baselines are synthesized here so a
/// failing baseline only affects its own cells.
ControllerSystem lower_controller(const ScenarioConfig& cfg, const ScenarioDesigns& d, ControllerKind k);

/// The measured cost (1/T) int ||z_m||^2 of the composite at a given alpha,
/// for the disturbance named in the ES settings (or `disturbance` if given).
double measured_cost(const ScenarioConfig& cfg, const ScenarioDesigns& d, double alpha,
                     const std::string& disturbance = {});

enum class CellKind { cost, hinf_norm };

struct BenchmarkCell {
    ControllerKind controller = ControllerKind::mocc;
    std::string row;
    CellKind kind = CellKind::cost;
    bool completed = false;
    double value = 0.0;
    std::optional<double> steady_state;  // closed-form ||z||_P^2 for cost cells
    std::string error;
    std::optional<ExpectedCell> expected;

    /// "<controller>_<row>", used for trace file names.
    std::string id() const;
    /// Empty when there is no expected value.
    std::optional<bool> within() const;
};

struct PerformanceReport {
    std::string source;
    double h = 0.0;
    double T = 0.0;
    double gamma = 0.0;
    bool gamma_searched = false;
    double alpha = 1.0;
    std::vector<ControllerKind> controllers;
    std::vector<std::string> rows;  // disturbance names, then the norm row
    std::vector<BenchmarkCell> cells;  // row-major over (rows, controllers)
    std::string synthesis_error;  // set when nothing could run

    bool complete() const;
    const BenchmarkCell* find(ControllerKind k, const std::string& row) const;
};

struct BenchmarkOptions {
    /// Called once per finished cost cell with its recorded trace. Calls may
    /// come from worker threads but never concurrently for the same cell.
    std::function<void(const BenchmarkCell&, const SimulationTrace&)> on_trace;
    unsigned workers = 0;  // 0: hardware concurrency
};

/// Per-cell failures are recorded in the cell, not thrown.
PerformanceReport run_benchmark(const ScenarioConfig& cfg, const BenchmarkOptions& opts = {});

/// Version string written into the reports.
const char* tool_version();

}  // namespace mocc
