#pragma once

// Scenario files: YAML documents describing the plant, the controllers to
// compare, the signals and the run settings. See README.md for the grammar.

#include <optional>
#include <string>
#include <vector>

#include "mocc/baselines.hpp"
#include "mocc/es.hpp"
#include "mocc/lti.hpp"
#include "mocc/signals.hpp"
#include "mocc/simulation.hpp"

namespace mocc {

enum class ControllerKind { mocc, hinf, lqt, dobc };

const char* to_string(ControllerKind k);
ControllerKind controller_kind_from_string(const std::string& s);

struct NamedSignal {
    std::string name;
    SignalSpec spec;
};

struct DobcSettings {
    Matrix Aw, Cw, Lchi, Lw;
};

enum class ToleranceKind { relative, absolute };

/// Published value of one report cell and the band it is checked against.
/// Indicative cells are reported but do not decide pass or fail.
struct ExpectedCell {
    ControllerKind controller = ControllerKind::mocc;
    std::string row;  // disturbance name, or "hinf_norm"
    double value = 0.0;
    ToleranceKind kind = ToleranceKind::relative;
    double tolerance = 0.0;
    bool indicative = false;

    bool accepts(double x) const;
};

struct EsSettings {
    EsState initial;
    int iterations = 100;
    std::string disturbance;  // name of the entry in `disturbances`
    std::size_t window = 20;  // trailing-mean window for the reported estimate
};

struct ScenarioConfig {
    std::string source;
    PlantModel plant;
    Matrix L;
    std::optional<double> gamma;  // absent: smallest feasible gamma to gamma_tol
    double gamma_tol = 1e-4;
    double alpha = 1.0;
    std::optional<DobcSettings> dobc;
    HinfFeedforwardForm hinf_form = HinfFeedforwardForm::game;
    std::vector<ControllerKind> controllers;
    SignalSpec reference;
    std::vector<NamedSignal> disturbances;
    SimOptions sim;
    bool hinf_norms = true;
    bool power_norms = true;
    EsSettings es;
    std::vector<ExpectedCell> expected;

    const NamedSignal& disturbance(const std::string& name) const;
    /// Cross-field checks; ConfigError names the offending key.
    void validate() const;
    const ExpectedCell* find_expected(ControllerKind k, const std::string& row) const;
};

/// Name of the H-infinity norm row in reports and expected cells.
inline constexpr const char* kNormRow = "hinf_norm";

/// ConfigError on parse errors, unknown keys, bad dimensions or values.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");

}  // namespace mocc
