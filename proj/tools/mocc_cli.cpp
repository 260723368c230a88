// mocc: command-line front end over the scenario files in configs/.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "mocc/analysis.hpp"
#include "mocc/baselines.hpp"
#include "mocc/benchmark.hpp"
#include "mocc/config.hpp"
#include "mocc/report.hpp"
#include "mocc/simulation.hpp"

using namespace mocc;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitFailed = 1;  // ran, but a cell or check failed
constexpr int kExitUsage = 2;   // bad config or arguments

struct Overrides {
    std::string config;
    std::optional<double> h, T, alpha, gamma;
    std::string out = ".";
};

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--h", o.h, "Integration step [s]");
    sub->add_option("--T", o.T, "Horizon [s]");
    sub->add_option("--alpha", o.alpha, "Gain on Q (initial estimate for tune-alpha)");
    sub->add_option("--gamma", o.gamma, "H-infinity level (skips the gamma search)");
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
}

ScenarioConfig load(const Overrides& o) {
    ScenarioConfig c = load_config(o.config);
    if (o.h) c.sim.h = *o.h;
    if (o.T) c.sim.T = *o.T;
    if (o.alpha) {
        c.alpha = *o.alpha;
        c.es.initial.alpha_hat = *o.alpha;
    }
    if (o.gamma) c.gamma = *o.gamma;
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("command line override: ") + e.what());
    }
    return c;
}

json to_json(const Matrix& M) {
    json rows = json::array();
    for (Index i = 0; i < M.rows(); ++i) {
        json r = json::array();
        for (Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
        rows.push_back(r);
    }
    return rows;
}

json to_json(const CVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
}

std::filesystem::path out_file(const Overrides& o, const std::string& name) {
    std::filesystem::create_directories(o.out);
    return std::filesystem::path(o.out) / name;
}

void write_json(const Overrides& o, const std::string& name, const json& j) {
    const auto p = out_file(o, name);
    std::ofstream os(p);
    if (!os) throw Error("cannot open " + p.string() + " for writing");
    os << j.dump(2) << '\n';
}

ControllerKind parse_kind(const std::string& s) { return controller_kind_from_string(s); }

int cmd_synthesize(const Overrides& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = load(o);
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json j;
    j["source"] = cfg.source;
    j["lqt"] = {{"F", to_json(d.lqt.F)}, {"Pi", to_json(d.lqt.Pi)}, {"S_ff", to_json(d.lqt.S_ff)}};
    j["hinf"] = {{"gamma", d.gamma},
                 {"gamma_searched", d.gamma_searched},
                 {"P1", to_json(d.hinf.P1)},
                 {"P2", to_json(d.hinf.P2)},
                 {"Ainf", to_json(d.hinf.Ainf)},
                 {"Binf", to_json(d.hinf.Binf)},
                 {"Cinf", to_json(d.hinf.Cinf)}};
    if (d.gamma_searched) {
        const GammaSearch gs = hinf_gamma_search(cfg.plant, cfg.gamma_tol);
        j["hinf"]["search"] = {{"tol", cfg.gamma_tol}, {"infeasible", gs.infeasible}, {"iterations", gs.iterations}};
    }
    j["observer"] = {{"L", to_json(cfg.L)}, {"eigenvalues", to_json(sorted_eigenvalues(cfg.plant.A + cfg.L * cfg.plant.C2))}};
    write_json(o, "synthesis.json", j);
    std::cout << std::setprecision(10) << "F = " << d.lqt.F << "\ngamma = " << d.gamma
              << (d.gamma_searched ? " (searched)" : " (configured)") << "\nsynthesis time " << secs << " s\n";
    return 0;
}

int cmd_verify_q(const Overrides& o, int points, double threshold) {
    const ScenarioConfig cfg = load(o);
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const FrequencyGrid grid = FrequencyGrid::logspace(-3.0, 3.0, static_cast<std::size_t>(points));
    const TransferCheck chk = verify_transfer_equality(d.mocc, d.hinf.controller(), grid);
    const bool ok = chk.max_deviation <= threshold;
    json j;
    j["mode"] = to_string(d.mocc.mode);
    j["points"] = points;
    j["max_deviation"] = chk.max_deviation;
    j["threshold"] = threshold;
    j["skipped"] = chk.skipped;
    j["Q_states"] = d.mocc.Q.states();
    j["ok"] = ok;
    write_json(o, "verify_q.json", j);
    std::cout << std::setprecision(6) << "max relative deviation " << chk.max_deviation << " over " << points
              << " frequencies: " << (ok ? "ok" : "FAILED") << '\n';
    return ok ? 0 : kExitFailed;
}

int cmd_analyze(const Overrides& o) {
    const ScenarioConfig cfg = load(o);
    const ScenarioDesigns d = synthesize_scenario(cfg);
    json j;
    j["gamma"] = d.gamma;
    bool ok = true;

    json norms = json::object();
    for (auto k : cfg.controllers) {
        try {
            const ClosedLoopModel cl = close_loop(cfg.plant, lower_controller(cfg, d, k));
            norms[to_string(k)] = {{"hinf_norm", hinf_norm(cl.w_to_z())},
                                   {"spectral_abscissa", spectral_abscissa(cl.sys.A)}};
        } catch (const Error& e) {
            norms[to_string(k)] = {{"error", e.what()}};
            ok = false;
        }
    }
    j["controllers"] = norms;

    // Split of the composite into the tracking loop and the disturbance loop.
    const LemmaDecomposition dec = decompose_lemma1(cfg.plant, lower_controller(cfg, d, ControllerKind::lqt),
                                                    hinf_controller(d.hinf));
    const double t1 = hinf_norm(dec.T_z1w);
    j["T_z1w_hinf_norm"] = t1;
    json scen = json::array();
    for (const auto& ds : cfg.disturbances) {
        json s;
        s["disturbance"] = ds.name;
        try {
            if (ds.spec.dependency) {
                SignalSpec w1 = ds.spec;
                w1.dependency.reset();
                const Theorem2Terms t = theorem2_bound(dec, d.gamma, cfg.reference, w1, *ds.spec.dependency);
                s["dependent"] = true;
                s["z"] = t.z;
                s["z1"] = t.z1;
                s["z2_tilde"] = t.z2_tilde;
                s["z2"] = t.z2;
                s["w"] = t.w;
                s["bound"] = t.bound;
                s["bound_holds"] = t.bound_holds;
            } else {
                const Theorem1Terms t = theorem1_decomposition(dec, ds.spec, cfg.reference);
                s["dependent"] = false;
                s["z"] = t.z;
                s["z1"] = t.z1;
                s["z2"] = t.z2;
            }
        } catch (const Error& e) {
            s["error"] = e.what();
        }
        scen.push_back(s);
    }
    j["power_norms"] = scen;
    write_json(o, "analysis.json", j);
    std::cout << j.dump(2) << '\n';
    return ok ? 0 : kExitFailed;
}

int cmd_simulate(const Overrides& o, const std::string& controller, std::string disturbance) {
    const ScenarioConfig cfg = load(o);
    const ControllerKind k = parse_kind(controller);
    if (disturbance.empty()) disturbance = cfg.disturbances.front().name;
    const SignalSpec& w = cfg.disturbance(disturbance).spec;
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const SimulationTrace tr = simulate(cfg.plant, lower_controller(cfg, d, k), cfg.reference, w, cfg.sim);
    BenchmarkCell cell;
    cell.controller = k;
    cell.row = disturbance;
    const auto p = out_file(o, "trace_" + cell.id() + ".csv");
    write_trace_csv(p.string(), tr);
    std::cout << std::setprecision(10) << cell.id() << ": J = " << tr.cost_z << ", J_m = " << tr.cost_zm << " -> "
              << p.string() << '\n';
    return 0;
}

int cmd_benchmark(const Overrides& o, bool traces, unsigned workers) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig cfg = load(o);
    BenchmarkOptions opts;
    opts.workers = workers;
    if (traces) {
        std::filesystem::create_directories(o.out);
        opts.on_trace = [&](const BenchmarkCell& c, const SimulationTrace& tr) {
            write_trace_csv((std::filesystem::path(o.out) / ("trace_" + c.id() + ".csv")).string(), tr);
        };
    }
    const PerformanceReport rep = run_benchmark(cfg, opts);
    emit_report(o.out, rep);
    write_table_csv(std::cout, rep);
    for (const auto& c : rep.cells) {
        if (!c.completed) std::cerr << c.id() << ": " << c.error << '\n';
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "benchmark finished in " << std::setprecision(3) << secs << " s\n";
    return rep.complete() ? 0 : kExitFailed;
}

int cmd_tune(const Overrides& o, std::optional<int> iterations) {
    const ScenarioConfig cfg = load(o);
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const int n = iterations.value_or(cfg.es.iterations);
    const TuneTrace trace = tune_alpha([&](double a) { return measured_cost(cfg, d, a); }, cfg.es.initial, n);
    write_tune_csv(out_file(o, "tune.csv").string(), trace);
    const double est = trace.samples.empty() ? cfg.es.initial.alpha_hat : trace.trailing_mean(cfg.es.window);
    json j;
    j["iterations"] = n;
    j["window"] = cfg.es.window;
    j["alpha_estimate"] = est;
    j["J_at_estimate"] = measured_cost(cfg, d, est);
    write_json(o, "tune.json", j);
    std::cout << std::setprecision(6) << "alpha_hat (trailing mean of " << cfg.es.window << ") = " << est
              << ", J = " << j["J_at_estimate"].get<double>() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-objective composite control toolkit"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Overrides o;

    auto* syn = app.add_subcommand("synthesize", "LQ tracking and H-infinity designs");
    add_common(syn, o);

    auto* ver = app.add_subcommand("verify-q", "Check that the composite equals K when alpha = 1");
    add_common(ver, o);
    int points = 50;
    double threshold = 1e-8;
    ver->add_option("--points", points, "Log-spaced frequencies in [1e-3, 1e3]")->capture_default_str();
    ver->add_option("--threshold", threshold, "Largest accepted relative deviation")->capture_default_str();

    auto* ana = app.add_subcommand("analyze", "Closed-loop norms and power-norm decomposition");
    add_common(ana, o);

    auto* sim = app.add_subcommand("simulate", "Simulate one controller against one disturbance");
    add_common(sim, o);
    std::string controller = "mocc", disturbance;
    sim->add_option("--controller", controller, "mocc | hinf | lqt | dobc")->capture_default_str();
    sim->add_option("--disturbance", disturbance, "Disturbance name (default: first in the file)");

    auto* bench = app.add_subcommand("benchmark", "Every controller against every disturbance");
    add_common(bench, o);
    bool traces = false;
    unsigned workers = 0;
    bench->add_flag("--traces", traces, "Write trace_<cell>.csv for each cost cell");
    bench->add_option("--workers", workers, "Worker threads (0: one per core)");

    auto* tune = app.add_subcommand("tune-alpha", "Extremum seeking on alpha");
    add_common(tune, o);
    std::optional<int> iterations;
    tune->add_option("--iterations", iterations, "Override the iteration budget");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*syn) return cmd_synthesize(o);
        if (*ver) return cmd_verify_q(o, points, threshold);
        if (*ana) return cmd_analyze(o);
        if (*sim) return cmd_simulate(o, controller, disturbance);
        if (*bench) return cmd_benchmark(o, traces, workers);
        if (*tune) return cmd_tune(o, iterations);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailed;
    }
    return kExitUsage;
}
