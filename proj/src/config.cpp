#include "mocc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace mocc {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& msg) { throw ConfigError(key + ": " + msg); }

void allow_keys(const YAML::Node& node, const std::string& key, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) fail(key, "expected a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto name = kv.first.as<std::string>();
        if (!ok.count(name)) fail(key.empty() ? name : key + "." + name, "unknown key");
    }
}

std::string join(const std::string& parent, const std::string& child) {
    return parent.empty() ? child : parent + "." + child;
}

// Numbers, or strings such as "pi", "1.5pi", "-2.25*pi^2".
double scalar(const YAML::Node& node, const std::string& key) {
    if (!node.IsScalar()) fail(key, "expected a number");
    const auto text = node.as<std::string>();
    static const std::regex pi_form(R"(^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi(?:\s*\^\s*(\d+))?\s*$)");
    static const std::regex neg_pi(R"(^\s*-\s*pi(?:\s*\^\s*(\d+))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, neg_pi)) {
        const int p = m[1].matched ? std::stoi(m[1].str()) : 1;
        return -std::pow(M_PI, p);
    }
    if (std::regex_match(text, m, pi_form)) {
        const double c = m[1].matched ? std::stod(m[1].str()) : 1.0;
        const int p = m[2].matched ? std::stoi(m[2].str()) : 1;
        return c * std::pow(M_PI, p);
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        if (!std::isfinite(v)) fail(key, "value must be finite");
        return v;
    } catch (const std::logic_error&) {
        fail(key, "cannot parse '" + text + "' as a number");
    }
}

Matrix matrix(const YAML::Node& node, const std::string& key) {
    if (!node) fail(key, "missing");
    if (node.IsScalar()) return Matrix::Constant(1, 1, scalar(node, key));
    if (!node.IsSequence()) fail(key, "expected a list of rows");
    const auto rows = static_cast<Index>(node.size());
    if (rows == 0) return Matrix(0, 0);
    Index cols = -1;
    Matrix M;
    for (Index i = 0; i < rows; ++i) {
        const YAML::Node row = node[static_cast<std::size_t>(i)];
        const std::string rk = key + "[" + std::to_string(i) + "]";
        if (!row.IsSequence()) fail(rk, "expected a row list");
        if (cols < 0) {
            cols = static_cast<Index>(row.size());
            M.resize(rows, cols);
        } else if (static_cast<Index>(row.size()) != cols) {
            fail(rk, "ragged matrix (expected " + std::to_string(cols) + " entries)");
        }
        for (Index j = 0; j < cols; ++j) M(i, j) = scalar(row[static_cast<std::size_t>(j)], rk + "[" + std::to_string(j) + "]");
    }
    return M;
}

bool boolean(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(key, "expected true or false");
    }
}

int integer(const YAML::Node& node, const std::string& key) {
    const double v = scalar(node, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(key, "expected an integer");
    return static_cast<int>(v);
}

ChannelSignal channel(const YAML::Node& node, const std::string& key) {
    allow_keys(node, key, {"offset", "tones"});
    ChannelSignal ch;
    if (node["offset"]) ch.offset = scalar(node["offset"], join(key, "offset"));
    if (const YAML::Node tones = node["tones"]) {
        if (!tones.IsSequence()) fail(join(key, "tones"), "expected a list");
        for (std::size_t i = 0; i < tones.size(); ++i) {
            const std::string tk = join(key, "tones") + "[" + std::to_string(i) + "]";
            allow_keys(tones[i], tk, {"amplitude", "omega", "phase"});
            Sinusoid s;
            s.amplitude = scalar(tones[i]["amplitude"], join(tk, "amplitude"));
            s.omega = scalar(tones[i]["omega"], join(tk, "omega"));
            if (tones[i]["phase"]) s.phase = scalar(tones[i]["phase"], join(tk, "phase"));
            if (s.omega < 0.0) fail(join(tk, "omega"), "must be non-negative");
            ch.tones.push_back(s);
        }
    }
    return ch;
}

StateSpace state_space(const YAML::Node& node, const std::string& key) {
    allow_keys(node, key, {"A", "B", "C", "D"});
    try {
        return StateSpace(matrix(node["A"], join(key, "A")), matrix(node["B"], join(key, "B")),
                          matrix(node["C"], join(key, "C")), matrix(node["D"], join(key, "D")));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(key, e.what());
    }
}

// Either {channels: [...], dependency: ...} or a single channel {offset, tones, dependency}.
SignalSpec signal(const YAML::Node& node, const std::string& key, std::initializer_list<const char*> extra = {}) {
    std::vector<const char*> keys{"channels", "offset", "tones", "dependency"};
    keys.insert(keys.end(), extra.begin(), extra.end());
    if (!node.IsMap()) fail(key, "expected a mapping");
    for (const auto& kv : node) {
        const auto name = kv.first.as<std::string>();
        if (std::find_if(keys.begin(), keys.end(), [&](const char* k) { return name == k; }) == keys.end()) {
            fail(join(key, name), "unknown key");
        }
    }
    SignalSpec s;
    if (const YAML::Node chans = node["channels"]) {
        if (node["offset"] || node["tones"]) fail(key, "use either channels or offset/tones, not both");
        if (!chans.IsSequence()) fail(join(key, "channels"), "expected a list");
        for (std::size_t i = 0; i < chans.size(); ++i) {
            s.channels.push_back(channel(chans[i], join(key, "channels") + "[" + std::to_string(i) + "]"));
        }
    } else {
        YAML::Node single(YAML::NodeType::Map);
        if (node["offset"]) single["offset"] = node["offset"];
        if (node["tones"]) single["tones"] = node["tones"];
        s.channels.push_back(channel(single, key));
    }
    if (node["dependency"]) s.dependency = state_space(node["dependency"], join(key, "dependency"));
    try {
        s.validate();
        to_spectrum(s);
    } catch (const Error& e) {
        fail(key, e.what());
    }
    return s;
}

}  // namespace

const char* to_string(ControllerKind k) {
    switch (k) {
        case ControllerKind::mocc: return "mocc";
        case ControllerKind::hinf: return "hinf";
        case ControllerKind::lqt: return "lqt";
        case ControllerKind::dobc: return "dobc";
    }
    return "unknown";
}

ControllerKind controller_kind_from_string(const std::string& s) {
    if (s == "mocc") return ControllerKind::mocc;
    if (s == "hinf") return ControllerKind::hinf;
    if (s == "lqt") return ControllerKind::lqt;
    if (s == "dobc") return ControllerKind::dobc;
    throw ConfigError("controllers: unknown controller kind '" + s + "' (expected mocc, hinf, lqt or dobc)");
}

bool ExpectedCell::accepts(double x) const {
    if (!std::isfinite(x)) return false;
    const double band = kind == ToleranceKind::relative ? tolerance * std::abs(value) : tolerance;
    return std::abs(x - value) <= band;
}

const ExpectedCell* ScenarioConfig::find_expected(ControllerKind k, const std::string& row) const {
    for (const auto& e : expected) {
        if (e.controller == k && e.row == row) return &e;
    }
    return nullptr;
}

const NamedSignal& ScenarioConfig::disturbance(const std::string& name) const {
    for (const auto& d : disturbances) {
        if (d.name == name) return d;
    }
    throw ConfigError("disturbances: no entry named '" + name + "'");
}

void ScenarioConfig::validate() const {
    try {
        plant.validate();
    } catch (const Error& e) {
        fail("plant", e.what());
    }
    const auto& p = plant;
    if (p.R1().llt().info() != Eigen::Success) fail("plant.D12", "D12'D12 must be positive definite");
    if (p.R2().llt().info() != Eigen::Success) fail("plant.D21", "D21 D21' must be positive definite");
    if (L.rows() != p.n() || L.cols() != p.p2()) fail("observer.L", "must be n x p2");
    if (gamma && !(*gamma > 0.0)) fail("hinf.gamma", "must be positive");
    if (!(gamma_tol > 0.0)) fail("hinf.tol", "must be positive");
    if (!(sim.h > 0.0)) fail("simulation.h", "must be positive");
    if (!(sim.T > 0.0)) fail("simulation.T", "must be positive");
    if (sim.T / sim.h > 1e9) fail("simulation", "too many steps");
    if (reference.dim() != p.p2()) fail("reference", "must have p2 channels");
    if (reference.dependency) fail("reference.dependency", "the reference cannot depend on another signal");
    std::set<std::string> names;
    for (const auto& d : disturbances) {
        if (!names.insert(d.name).second) fail("disturbances", "duplicate name '" + d.name + "'");
        if (d.spec.dim() != p.m1()) fail("disturbances." + d.name, "must have m1 channels");
        if (d.spec.dependency &&
            (d.spec.dependency->inputs() != p.p2() || d.spec.dependency->outputs() != p.m1())) {
            fail("disturbances." + d.name + ".dependency", "must map p2 reference channels to m1 disturbance channels");
        }
    }
    for (auto k : controllers) {
        if (k == ControllerKind::dobc && !dobc) fail("dobc", "required when controllers include dobc");
    }
    if (dobc) {
        const Index nw = dobc->Aw.rows();
        if (dobc->Aw.cols() != nw) fail("dobc.Aw", "must be square");
        if (dobc->Cw.rows() != p.m1() || dobc->Cw.cols() != nw) fail("dobc.Cw", "must be m1 x dim(Aw)");
        if (dobc->Lchi.rows() != p.n() || dobc->Lchi.cols() != p.p2()) fail("dobc.Lchi", "must be n x p2");
        if (dobc->Lw.rows() != nw || dobc->Lw.cols() != p.p2()) fail("dobc.Lw", "must be dim(Aw) x p2");
    }
    if (!es.disturbance.empty()) disturbance(es.disturbance);
    try {
        es.initial.validate();
    } catch (const Error& e) {
        fail("es", e.what());
    }
    if (es.iterations < 0) fail("es.iterations", "must be non-negative");
    if (es.window == 0) fail("es.window", "must be positive");
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& e = expected[i];
        if (e.row != kNormRow && !names.count(e.row)) {
            fail("expected[" + std::to_string(i) + "].row", "'" + e.row + "' is neither a disturbance nor " + kNormRow);
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (expected[j].controller == e.controller && expected[j].row == e.row) {
                fail("expected[" + std::to_string(i) + "]", "duplicate cell");
            }
        }
    }
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(source + ": parse error: " + e.what());
    }
    if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
    allow_keys(root, "", {"plant", "observer", "hinf", "mocc", "dobc", "hinf_tracking", "controllers", "reference",
                          "disturbances", "simulation", "analysis", "es", "expected"});

    ScenarioConfig c;
    c.source = source;
    const YAML::Node plant = root["plant"];
    if (!plant) fail("plant", "missing section");
    allow_keys(plant, "plant", {"A", "B1", "B2", "C1", "C2", "D12", "D21"});
    c.plant.A = matrix(plant["A"], "plant.A");
    c.plant.B1 = matrix(plant["B1"], "plant.B1");
    c.plant.B2 = matrix(plant["B2"], "plant.B2");
    c.plant.C1 = matrix(plant["C1"], "plant.C1");
    c.plant.C2 = matrix(plant["C2"], "plant.C2");
    c.plant.D12 = matrix(plant["D12"], "plant.D12");
    c.plant.D21 = matrix(plant["D21"], "plant.D21");

    const YAML::Node obs = root["observer"];
    if (!obs) fail("observer", "missing section");
    allow_keys(obs, "observer", {"L"});
    c.L = matrix(obs["L"], "observer.L");

    if (const YAML::Node h = root["hinf"]) {
        allow_keys(h, "hinf", {"gamma", "tol"});
        if (h["gamma"] && !(h["gamma"].IsScalar() && h["gamma"].as<std::string>() == "min")) {
            c.gamma = scalar(h["gamma"], "hinf.gamma");
        }
        if (h["tol"]) c.gamma_tol = scalar(h["tol"], "hinf.tol");
    }
    if (const YAML::Node m = root["mocc"]) {
        allow_keys(m, "mocc", {"alpha"});
        if (m["alpha"]) c.alpha = scalar(m["alpha"], "mocc.alpha");
    }
    if (const YAML::Node d = root["dobc"]) {
        allow_keys(d, "dobc", {"Aw", "Cw", "Lchi", "Lw"});
        c.dobc = DobcSettings{matrix(d["Aw"], "dobc.Aw"), matrix(d["Cw"], "dobc.Cw"), matrix(d["Lchi"], "dobc.Lchi"),
                              matrix(d["Lw"], "dobc.Lw")};
    }
    if (const YAML::Node t = root["hinf_tracking"]) {
        allow_keys(t, "hinf_tracking", {"feedforward"});
        if (t["feedforward"]) {
            const auto f = t["feedforward"].as<std::string>();
            if (f == "game") c.hinf_form = HinfFeedforwardForm::game;
            else if (f == "closed_loop") c.hinf_form = HinfFeedforwardForm::closed_loop;
            else fail("hinf_tracking.feedforward", "expected game or closed_loop");
        }
    }
    if (const YAML::Node ks = root["controllers"]) {
        if (!ks.IsSequence()) fail("controllers", "expected a list");
        for (const auto& k : ks) c.controllers.push_back(controller_kind_from_string(k.as<std::string>()));
    } else {
        c.controllers = {ControllerKind::mocc, ControllerKind::hinf, ControllerKind::lqt, ControllerKind::dobc};
    }
    if (!root["reference"]) fail("reference", "missing section");
    c.reference = signal(root["reference"], "reference");
    if (const YAML::Node ds = root["disturbances"]) {
        if (!ds.IsSequence()) fail("disturbances", "expected a list");
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::string key = "disturbances[" + std::to_string(i) + "]";
            if (!ds[i].IsMap() || !ds[i]["name"]) fail(key, "each disturbance needs a name");
            NamedSignal ns;
            ns.name = ds[i]["name"].as<std::string>();
            ns.spec = signal(ds[i], "disturbances." + ns.name, {"name"});
            c.disturbances.push_back(std::move(ns));
        }
    } else {
        c.disturbances.push_back({"0", SignalSpec::zero(c.plant.m1())});
    }
    if (const YAML::Node s = root["simulation"]) {
        allow_keys(s, "simulation", {"h", "T"});
        if (s["h"]) c.sim.h = scalar(s["h"], "simulation.h");
        if (s["T"]) c.sim.T = scalar(s["T"], "simulation.T");
    }
    if (const YAML::Node a = root["analysis"]) {
        allow_keys(a, "analysis", {"hinf_norms", "power_norms"});
        if (a["hinf_norms"]) c.hinf_norms = boolean(a["hinf_norms"], "analysis.hinf_norms");
        if (a["power_norms"]) c.power_norms = boolean(a["power_norms"], "analysis.power_norms");
    }
    if (const YAML::Node e = root["es"]) {
        allow_keys(e, "es", {"amplitude", "omega", "gain", "filter", "alpha0", "iterations", "disturbance", "window"});
        EsState& s = c.es.initial;
        if (e["amplitude"]) s.amplitude = scalar(e["amplitude"], "es.amplitude");
        if (e["omega"]) s.omega = scalar(e["omega"], "es.omega");
        if (e["gain"]) s.gain = scalar(e["gain"], "es.gain");
        if (e["filter"]) s.filter = scalar(e["filter"], "es.filter");
        if (e["alpha0"]) s.alpha_hat = scalar(e["alpha0"], "es.alpha0");
        if (e["iterations"]) c.es.iterations = integer(e["iterations"], "es.iterations");
        if (e["disturbance"]) c.es.disturbance = e["disturbance"].as<std::string>();
        if (e["window"]) {
            const int w = integer(e["window"], "es.window");
            if (w <= 0) fail("es.window", "must be positive");
            c.es.window = static_cast<std::size_t>(w);
        }
    }
    if (const YAML::Node ex = root["expected"]) {
        if (!ex.IsSequence()) fail("expected", "expected a list");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            const std::string key = "expected[" + std::to_string(i) + "]";
            allow_keys(ex[i], key, {"controller", "row", "value", "rel_tol", "abs_tol", "indicative"});
            ExpectedCell e;
            if (!ex[i]["controller"]) fail(join(key, "controller"), "missing");
            if (!ex[i]["row"]) fail(join(key, "row"), "missing");
            e.controller = controller_kind_from_string(ex[i]["controller"].as<std::string>());
            e.row = ex[i]["row"].as<std::string>();
            e.value = scalar(ex[i]["value"], join(key, "value"));
            const bool rel = static_cast<bool>(ex[i]["rel_tol"]), abs = static_cast<bool>(ex[i]["abs_tol"]);
            if (rel == abs) fail(key, "give exactly one of rel_tol and abs_tol");
            e.kind = rel ? ToleranceKind::relative : ToleranceKind::absolute;
            e.tolerance = rel ? scalar(ex[i]["rel_tol"], join(key, "rel_tol")) : scalar(ex[i]["abs_tol"], join(key, "abs_tol"));
            if (!(e.tolerance > 0.0)) fail(join(key, rel ? "rel_tol" : "abs_tol"), "must be positive");
            if (ex[i]["indicative"]) e.indicative = boolean(ex[i]["indicative"], join(key, "indicative"));
            c.expected.push_back(e);
        }
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace mocc
