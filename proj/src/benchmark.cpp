#include "mocc/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "mocc/analysis.hpp"
#include "mocc/baselines.hpp"
#include "mocc/simulation.hpp"

namespace mocc {

const char* tool_version() { return "mocc 0.1.0"; }

ScenarioDesigns synthesize_scenario(const ScenarioConfig& cfg) {
    ScenarioDesigns d;
    d.lqt = lqt_synthesize(cfg.plant);
    if (cfg.gamma) {
        d.gamma = *cfg.gamma;
    } else {
        d.gamma = hinf_gamma_search(cfg.plant, cfg.gamma_tol).gamma;
        d.gamma_searched = true;
    }
    const HinfResult res = hinf_central(cfg.plant, d.gamma);
    if (!res.feasible()) {
        throw Error("H-infinity synthesis infeasible at gamma = " + std::to_string(d.gamma) + " (" +
                    to_string(res.failure) + "): " + res.detail);
    }
    d.hinf = *res.design;
    d.mocc = lqt_hinf_composite(cfg.plant, d.lqt, d.hinf, cfg.L, cfg.alpha);
    return d;
}

ControllerSystem lower_controller(const ScenarioConfig& cfg, const ScenarioDesigns& d, ControllerKind k) {
    switch (k) {
        case ControllerKind::mocc: return d.mocc.realize();
        case ControllerKind::hinf:
            return hinf_tracking_controller(cfg.plant, hinf_tracking_synthesize(cfg.plant, d.gamma, cfg.hinf_form));
        case ControllerKind::lqt: return lqt_controller(cfg.plant, d.lqt, cfg.L);
        case ControllerKind::dobc: {
            if (!cfg.dobc) throw ConfigError("dobc: section missing");
            const auto& s = *cfg.dobc;
            return dobc_controller(cfg.plant, dobc_synthesize(cfg.plant, s.Aw, s.Cw, s.Lchi, s.Lw, d.lqt));
        }
    }
    throw Error("lower_controller: unknown kind");
}

double measured_cost(const ScenarioConfig& cfg, const ScenarioDesigns& d, double alpha, const std::string& disturbance) {
    const std::string& name = disturbance.empty() ? cfg.es.disturbance : disturbance;
    if (name.empty()) throw ConfigError("es.disturbance: no disturbance selected for the measured cost");
    const SignalSpec& w = cfg.disturbance(name).spec;
    SimOptions o = cfg.sim;
    o.record = false;
    return simulate(cfg.plant, d.mocc.with_alpha(alpha).realize(), cfg.reference, w, o).cost_zm;
}

std::string BenchmarkCell::id() const {
    std::string s = std::string(to_string(controller)) + "_";
    for (char c : row) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return s;
}

std::optional<bool> BenchmarkCell::within() const {
    if (!expected) return std::nullopt;
    return completed && expected->accepts(value);
}

bool PerformanceReport::complete() const {
    if (!synthesis_error.empty()) return false;
    for (const auto& c : cells) {
        if (!c.completed) return false;
    }
    return true;
}

const BenchmarkCell* PerformanceReport::find(ControllerKind k, const std::string& row) const {
    for (const auto& c : cells) {
        if (c.controller == k && c.row == row) return &c;
    }
    return nullptr;
}

namespace {

double steady_state_cost(const ClosedLoopModel& cl, const SignalSpec& w, const SignalSpec& r) {
    const PowerSpectrum in = stack(to_spectrum(w, r), to_spectrum(r));
    if (!is_stable(cl.sys.A)) throw StabilityError("closed loop is not stable");
    const auto z = cl.z;
    return map_lines(in, z.size, [&](double om) -> CMatrix { return cl.response(om).middleRows(z.offset, z.size); })
        .power_squared();
}

}  // namespace

PerformanceReport run_benchmark(const ScenarioConfig& cfg, const BenchmarkOptions& opts) {
    PerformanceReport rep;
    rep.source = cfg.source;
    rep.h = cfg.sim.h;
    rep.T = cfg.sim.T;
    rep.alpha = cfg.alpha;
    rep.controllers = cfg.controllers;
    for (const auto& d : cfg.disturbances) rep.rows.push_back(d.name);
    if (cfg.hinf_norms) rep.rows.push_back(kNormRow);
    for (const auto& row : rep.rows) {
        for (auto k : cfg.controllers) {
            BenchmarkCell c;
            c.controller = k;
            c.row = row;
            c.kind = row == kNormRow ? CellKind::hinf_norm : CellKind::cost;
            if (const ExpectedCell* e = cfg.find_expected(k, row)) c.expected = *e;
            rep.cells.push_back(std::move(c));
        }
    }

    ScenarioDesigns designs;
    try {
        designs = synthesize_scenario(cfg);
    } catch (const Error& e) {
        rep.synthesis_error = e.what();
        for (auto& c : rep.cells) c.error = std::string("synthesis: ") + e.what();
        return rep;
    }
    rep.gamma = designs.gamma;
    rep.gamma_searched = designs.gamma_searched;

    // Lower every controller up front (cheap, sequential); failures mark the column.
    std::vector<std::optional<ControllerSystem>> lowered(cfg.controllers.size());
    std::vector<std::string> lower_error(cfg.controllers.size());
    for (std::size_t j = 0; j < cfg.controllers.size(); ++j) {
        try {
            lowered[j] = lower_controller(cfg, designs, cfg.controllers[j]);
        } catch (const Error& e) {
            lower_error[j] = e.what();
        }
    }

    const std::size_t ncol = cfg.controllers.size();
    auto run_cell = [&](std::size_t idx) {
        BenchmarkCell& c = rep.cells[idx];
        const std::size_t j = idx % ncol;
        if (!lowered[j]) {
            c.error = "synthesis: " + lower_error[j];
            return;
        }
        try {
            const ClosedLoopModel cl = close_loop(cfg.plant, *lowered[j]);
            if (c.kind == CellKind::hinf_norm) {
                c.value = hinf_norm(cl.w_to_z());
            } else {
                const SignalSpec& w = cfg.disturbance(c.row).spec;
                SimOptions o = cfg.sim;
                o.record = static_cast<bool>(opts.on_trace);
                const SimulationTrace tr = simulate(cfg.plant, *lowered[j], cfg.reference, w, o);
                c.value = tr.cost_z;
                if (cfg.power_norms) {
                    try {
                        c.steady_state = steady_state_cost(cl, w, cfg.reference);
                    } catch (const Error&) {
                        // Not every signal pair has a bounded two-sided response.
                    }
                }
                if (opts.on_trace) opts.on_trace(c, tr);
            }
            c.completed = true;
        } catch (const Error& e) {
            c.error = e.what();
        }
    };

    const std::size_t ncells = rep.cells.size();
    unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, ncells));
    if (workers <= 1) {
        for (std::size_t i = 0; i < ncells; ++i) run_cell(i);
    } else {
        // Each cell writes only its own slot, so the report order does not
        // depend on scheduling.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < ncells; i = next++) run_cell(i);
            });
        }
        for (auto& th : pool) th.join();
    }
    return rep;
}

}  // namespace mocc
