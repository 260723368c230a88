// End-to-end acceptance run on the double integrator scenario and a set of
// random plants. Prints one PASS/FAIL line per criterion; exit status is the
// number of failed criteria. `mocc_acceptance N` runs criterion N alone.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mocc/analysis.hpp"
#include "mocc/baselines.hpp"
#include "mocc/benchmark.hpp"
#include "mocc/riccati.hpp"
#include "mocc/simulation.hpp"

using namespace mocc;
using namespace mocc::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    // Records one check; the detail line lists the measured value either way.
    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (ok ? "" : " [out of band]");
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ScenarioConfig scenario() { return load_config(std::string(MOCC_SOURCE_DIR) + "/configs/double_integrator.cfg"); }

const FrequencyGrid kGrid = FrequencyGrid::logspace(-3, 3, 50);

// Published Table I: rows w0..w3 and the norm row; columns MOCC, Hinf, LQT, DOBC.
const char* kRows[] = {"w0", "w1", "w2", "w3", "hinf_norm"};
const ControllerKind kCols[] = {ControllerKind::mocc, ControllerKind::hinf, ControllerKind::lqt, ControllerKind::dobc};
const double kTable[5][4] = {{0.0408, 0.1127, 0.0408, 0.0408},
                             {0.1245, 0.1970, 0.2629, 0.1319},
                             {0.3771, 0.4499, 0.6698, 0.4744},
                             {0.6296, 0.6946, 1.2425, 0.8159},
                             {0.4108, 0.4108, 0.6835, 1.0020}};

// ---------------------------------------------------------------------------

void synthesis(Outcome& o) {
    const PlantModel p = double_integrator_example();
    const auto t0 = std::chrono::steady_clock::now();
    const LqtDesign lqt = lqt_synthesize(p);
    const GammaSearch gs = hinf_gamma_search(p, 1e-4);
    const double elapsed = seconds_since(t0);

    const double f0 = -33.33, f1 = -8.17;
    o.check(std::abs(lqt.F(0, 0) / f0 - 1) <= 0.01 && std::abs(lqt.F(0, 1) / f1 - 1) <= 0.01,
            fmt("F = [%.4f, %.4f]", lqt.F(0, 0), lqt.F(0, 1)));
    o.check(std::abs(gs.gamma - 0.4108) <= 5e-4, fmt("gamma_min = %.5f (bracket %.5f, published 0.4108)", gs.gamma,
                                                     gs.infeasible));
    // Independent confirmation of the bracket: the design at the upper end
    // really achieves its level, the lower end has no admissible design.
    const HinfResult hi = hinf_central(p, gs.gamma);
    bool confirmed = hi.feasible() && !hinf_central(p, gs.infeasible).feasible();
    if (confirmed) {
        const double norm = hinf_norm(close_loop(p, hinf_controller(*hi.design)).w_to_z());
        confirmed = norm < gs.gamma;
        o.check(confirmed, fmt("closed-loop norm at gamma_min = %.5f", norm));
    } else {
        o.check(false, "bracket not confirmed");
    }
    o.check(elapsed < 1.0, fmt("synthesis %.3f s", elapsed));
}

void table(Outcome& o) {
    ScenarioConfig cfg = scenario();
    cfg.sim.h = 1e-3;
    cfg.sim.T = 100.0;
    const auto t0 = std::chrono::steady_clock::now();
    const PerformanceReport rep = run_benchmark(cfg);
    const double elapsed = seconds_since(t0);
    o.check(rep.complete(), "all cells completed");
    int bad = 0;
    double worst_cost = 0.0, worst_hinf = 0.0, worst_norm = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 4; ++j) {
            const BenchmarkCell* c = rep.find(kCols[j], kRows[i]);
            if (!c || !c->completed) {
                ++bad;
                continue;
            }
            const double ref = kTable[i][j];
            if (i == 4) {
                const double dev = std::abs(c->value - ref);
                worst_norm = std::max(worst_norm, dev);
                if (dev > 1e-3) ++bad;
            } else {
                const double rel = std::abs(c->value / ref - 1);
                const bool hinf_col = kCols[j] == ControllerKind::hinf;
                (hinf_col ? worst_hinf : worst_cost) = std::max(hinf_col ? worst_hinf : worst_cost, rel);
                if (rel > (hinf_col ? 0.15 : 0.05)) ++bad;
            }
        }
    }
    o.check(bad == 0, fmt("%g cells out of band", bad));
    o.check(worst_cost <= 0.05, fmt("worst cost deviation %.2f%%", 100 * worst_cost));
    o.check(worst_hinf <= 0.15, fmt("worst Hinf-tracking deviation %.2f%%", 100 * worst_hinf));
    o.check(worst_norm <= 1e-3, fmt("worst norm deviation %.1e", worst_norm));
    o.check(elapsed < 120.0, fmt("benchmark %.2f s", elapsed));
}

// One random plant with the composite of each mode and the matching Q = 0 case.
struct ModeCase {
    const char* mode;
    CompositeSpec spec;
    CompositeSpec same;  // C and K equal
};

std::vector<ModeCase> mode_cases(Rng& rng, const RandomPlant& rp, int i) {
    const PlantModel& p = rp.plant;
    const Matrix L = random_observer_gain(rng, p);
    std::vector<ModeCase> out;
    {
        ModeCase m{"general", {}, {}};
        m.spec.mode = CompositeMode::general;
        m.spec.C = random_controller(rng, p, i % 2 == 0);
        m.spec.K = random_controller(rng, p, i % 3 == 0);
        m.spec.L = L;
        m.same = m.spec;
        m.same.C = m.spec.K;
        out.push_back(m);
    }
    {
        ModeCase m{"shared", {}, {}};
        m.spec.mode = CompositeMode::shared;
        m.spec.F = random_state_feedback(rng, p);
        m.spec.K = random_controller(rng, p, i % 2 == 1);
        m.spec.L = L;
        m.same = m.spec;
        m.same.K = observer_controller(p, m.spec.F, L, Matrix::Zero(p.m2(), p.p2()));
        out.push_back(m);
    }
    {
        ModeCase m{"static", {}, {}};
        m.spec.mode = CompositeMode::static_gain;
        m.spec.C = ControllerRealization::static_gain(rp.static_gain);
        m.spec.K = random_controller(rng, p, true);
        m.spec.L = L;
        m.same = m.spec;
        m.same.K = m.spec.C;
        out.push_back(m);
    }
    return out;
}

void youla(Outcome& o) {
    Rng rng(2024);
    double worst_eq = 0.0, worst_q0 = 0.0, worst_state = 0.0;
    int cases = 0;
    for (int i = 0; i < 25; ++i) {
        const RandomPlant rp = random_plant(rng, 1 + i % 6);
        const PlantModel& p = rp.plant;
        SignalSpec w = SignalSpec::zero(p.m1());
        for (auto& ch : w.channels) ch.tones = {{1.0, 0.9, 0.1}, {0.5, 3.7, 0.4}};
        const SignalSpec r = SignalSpec::zero(p.p2());
        SimOptions so;
        so.h = 1e-3;
        so.T = 3.0;
        for (const ModeCase& m : mode_cases(rng, rp, i)) {
            ++cases;
            const CompositeController cq = assemble_composite(p, m.spec);
            worst_eq = std::max(worst_eq, verify_transfer_equality(cq, m.spec.K.K, kGrid).max_deviation);

            const CompositeController c0 = assemble_composite(p, m.same);
            const StateSpace q = c0.Q.system();
            for (double om : kGrid) worst_q0 = std::max(worst_q0, sigma_max(frequency_response(q, om)));

            // Along a trajectory: same plant motion as K alone, and the last
            // block of Q carries the state of K.
            const SimulationTrace comp = simulate(p, cq.realize(), r, w, so);
            const SimulationTrace alone = simulate(p, output_feedback(m.spec.K.K, p.p2()), r, w, so);
            const double scale = 1.0 + alone.x.cwiseAbs().maxCoeff();
            const Index nk = m.spec.K.K.states();
            double dev = (comp.x - alone.x).cwiseAbs().maxCoeff();
            if (nk > 0) dev = std::max(dev, (comp.x_ctrl.rightCols(nk) - alone.x_ctrl).cwiseAbs().maxCoeff());
            if (m.spec.mode == CompositeMode::general) {
                // Q = [C copy; observer copy; K copy] next to [x_hat; x_c].
                const Index n = p.n(), nc = m.spec.C.K.states();
                const Matrix xq = comp.x_ctrl.rightCols(nc + n + nk);
                dev = std::max(dev, (xq.leftCols(nc) - comp.x_ctrl.middleCols(n, nc)).cwiseAbs().maxCoeff());
                dev = std::max(dev, (xq.middleCols(nc, n) - comp.x_ctrl.leftCols(n)).cwiseAbs().maxCoeff());
            }
            worst_state = std::max(worst_state, dev / scale);
        }
    }
    o.check(worst_eq <= 1e-8, fmt("transfer equality %.1e over %g composites", worst_eq, cases));
    o.check(worst_q0 <= 1e-10, fmt("Q with C = K %.1e", worst_q0));
    o.check(worst_state <= 1e-8, fmt("state correspondence %.1e", worst_state));
}

// Tracking controllers with y - r into C, so both columns of Lemma 1 are exercised.
CompositeSpec tracked(CompositeSpec s) {
    s.tracking = true;
    return s;
}

ControllerRealization shared_c(const PlantModel& p, const CompositeSpec& s) {
    return observer_controller(p, s.F, s.L, Matrix::Zero(p.m2(), p.p2()));
}

void lemma(Outcome& o) {
    Rng rng(77);
    double worst_split = 0.0, worst_inv = 0.0;
    int cases = 0;
    for (int i = 0; i < 25; ++i) {
        const RandomPlant rp = random_plant(rng, 1 + i % 6);
        const PlantModel& p = rp.plant;
        for (const ModeCase& m : mode_cases(rng, rp, i)) {
            ++cases;
            const CompositeSpec s = tracked(m.spec);
            const StateSpace T = assemble_closed_loop(p, assemble_composite(p, s)).system();
            const ControllerRealization C = s.mode == CompositeMode::shared ? shared_c(p, s) : s.C;
            const LemmaDecomposition dec = decompose_lemma1(p, C, s.K);
            for (double om : kGrid) {
                const CMatrix t = frequency_response(T, om);
                CMatrix ref(t.rows(), t.cols());
                ref << dec.t1(om), dec.t2(om);
                worst_split = std::max(worst_split, sigma_max(t - ref) / (1 + sigma_max(ref)));
            }
            // Other observer gains (and for general C another output injection)
            // must leave the loop unchanged. The shared C is built from L itself.
            if (s.mode == CompositeMode::shared) continue;
            CompositeSpec s2 = s;
            s2.L = random_observer_gain(rng, p);
            if (s2.mode == CompositeMode::general && s2.C.Lc) {
                ControllerRealization c2 = s2.C;
                c2.Lc = *c2.Lc + 0.05 * randn(rng, c2.Lc->rows(), c2.Lc->cols());
                if (is_stable(c2.K.A + *c2.Lc * c2.K.C)) s2.C = c2;
            }
            const StateSpace T2 = assemble_closed_loop(p, assemble_composite(p, s2)).system();
            worst_inv = std::max(worst_inv, max_relative_gap(T, T2, kGrid));
        }
    }
    o.check(worst_split <= 1e-9, fmt("assembled vs [T_z1w, T_z2r] %.1e over %g loops", worst_split, cases));
    o.check(worst_inv <= 1e-9, fmt("invariance to (L, Lc) %.1e", worst_inv));
}

void theorems(Outcome& o) {
    const ScenarioConfig cfg = scenario();
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const LemmaDecomposition dec =
        decompose_lemma1(cfg.plant, lower_controller(cfg, d, ControllerKind::lqt), hinf_controller(d.hinf));

    // Independent frequency-disjoint signals.
    const SignalSpec& w1 = cfg.disturbance("w1").spec;
    const Theorem1Terms t1 = theorem1_decomposition(dec, w1, cfg.reference);
    o.check(std::abs(t1.z - (t1.z1 + t1.z2)) <= 1e-12 * t1.z,
            fmt("z = %.6f, z1 + z2 = %.6f", t1.z, t1.z1 + t1.z2));
    SimOptions so;
    so.h = 1e-3;
    so.T = 2000.0;
    so.record = false;
    const double sim = simulate(cfg.plant, d.mocc.realize(), cfg.reference, w1, so).cost_z;
    o.check(std::abs(sim / t1.z - 1) <= 0.01, fmt("2000 s simulation %.6f (%.3f%%)", sim, 100 * std::abs(sim / t1.z - 1)));

    // Dependent disturbance: the identity and a second route through the full loop.
    const NamedSignal& w3 = cfg.disturbance("w3");
    SignalSpec w3_free = w3.spec;
    w3_free.dependency.reset();
    const Theorem2Terms t2 = theorem2_bound(dec, d.gamma, cfg.reference, w3_free, *w3.spec.dependency);
    o.check(std::abs(t2.z - (t2.z1 + t2.z2_tilde)) <= 1e-6 * t2.z,
            fmt("z = %.6f, z1 + z2_tilde = %.6f", t2.z, t2.z1 + t2.z2_tilde));
    const ClosedLoopModel cl = close_loop(cfg.plant, d.mocc.realize());
    const PowerSpectrum in = stack(to_spectrum(w3.spec, cfg.reference), to_spectrum(cfg.reference));
    const double full = map_lines(in, cl.z.size, [&](double om) -> CMatrix {
                            return cl.response(om).middleRows(cl.z.offset, cl.z.size);
                        }).power_squared();
    o.check(std::abs(full - t2.z) <= 1e-6 * t2.z, fmt("closed-loop route %.6f", full));

    // Worst-case dependency against random stable filters.
    Rng rng(5);
    std::uniform_real_distribution<double> phase(0.0, 2 * M_PI);
    int beaten = 0;
    for (double om : FrequencyGrid::logspace(-2, 2, 20)) {
        const WorstDependency wd = worst_dependency(dec, d.gamma, om);
        const CVector v = CVector::Constant(1, std::polar(1.0, phase(rng)));
        const double best = dependency_objective(dec, d.gamma, om, wd.W, v);
        for (int k = 0; k < 200; ++k) {
            const Index nw = 1 + k % 3;
            const StateSpace W(random_stable(rng, nw, 0.1), randn(rng, nw, 1), randn(rng, 1, nw), randn(rng, 1, 1));
            const double obj = dependency_objective(dec, d.gamma, om, frequency_response(W, om), v);
            if (obj > best + 1e-9 * std::abs(best)) ++beaten;
        }
    }
    o.check(beaten == 0, fmt("worst-case filter beaten %g times in 4000 trials", beaten));
}

void kernels(Outcome& o) {
    Rng rng(606);
    double worst_care = 0.0;
    for (int i = 0; i < 30; ++i) {
        const Index n = 1 + i % 8, m = 1 + i % 3;
        CareProblem cp;
        cp.A = randn(rng, n, n);
        cp.B = randn(rng, n, m);
        const Matrix Qh = randn(rng, n, n);
        cp.Q = Qh.transpose() * Qh + 0.1 * Matrix::Identity(n, n);
        const Matrix Rh = randn(rng, m, m);
        cp.R = Rh.transpose() * Rh + Matrix::Identity(m, m);
        cp.S = Matrix();
        const Matrix X = solve_care(cp);
        worst_care = std::max(worst_care, care_residual(cp, X) / (1.0 + X.norm()));
    }
    o.check(worst_care <= 1e-8, fmt("CARE residual %.1e", worst_care));

    double worst_norm = 0.0;
    for (int i = 0; i < 10; ++i) {
        const Index n = 1 + i % 6;
        const StateSpace g(random_stable(rng, n, 0.05 + 0.1 * (i % 3)), randn(rng, n, 2), randn(rng, 2, n),
                           randn(rng, 2, 2, 0.2));
        const double ref = sweep_hinf_norm(g);
        worst_norm = std::max(worst_norm, std::abs(hinf_norm(g) - ref) / ref);
    }
    o.check(worst_norm <= 1e-4, fmt("hinf_norm vs sweep %.1e", worst_norm));

    // RK4 against the exact propagator of plant, composite and the signal
    // generators stacked into one autonomous linear system.
    const ScenarioConfig cfg = scenario();
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const ControllerSystem c = d.mocc.realize();
    const ClosedLoopModel cl = close_loop(cfg.plant, c);
    const double wr = M_PI, ww = 1.5 * M_PI, T = 10.0;
    const Index nx = cl.sys.states(), nb = c.nb;
    const CVector bp = c.feedforward->transfer(wr) * Complex(0.0, -1.0);
    Matrix Aa = Matrix::Zero(nx + 4, nx + 4);
    Aa.topLeftCorner(nx, nx) = cl.sys.A;
    Matrix G(2, 2);
    G << 0, -1, 1, 0;
    Aa.block(nx, nx, 2, 2) = wr * G;
    Aa.block(nx + 2, nx + 2, 2, 2) = ww * G;
    Aa.block(0, nx + 3, nx, 1) = cl.sys.B.middleCols(cl.w.offset, 1);
    Aa.block(0, nx + 1, nx, 1) = cl.sys.B.middleCols(cl.r.offset, 1);
    const Matrix Bb = cl.sys.B.middleCols(cl.b.offset, nb);
    Aa.block(0, nx, nx, 1) += Bb * bp.real();
    Aa.block(0, nx + 1, nx, 1) -= Bb * bp.imag();
    const DiscretePropagator dp =
        exact_discretize(StateSpace(Aa, Matrix::Zero(nx + 4, 1), Matrix::Zero(1, nx + 4), Matrix::Zero(1, 1)), T);
    Vector x0 = Vector::Zero(nx + 4);
    x0(nx) = 1.0;
    x0(nx + 2) = 1.0;
    const Vector exact = (dp.Ad * x0).head(nx);
    SimOptions so;
    so.h = 1e-3;
    so.T = T;
    so.record = false;
    const SimulationTrace tr =
        simulate(cfg.plant, c, SignalSpec::sine(1.0, wr), SignalSpec::sine(1.0, ww), so);
    const double rk = (tr.final_state.head(nx) - exact).cwiseAbs().maxCoeff();
    o.check(rk <= 1e-6, fmt("RK4 vs exact %.1e", rk));
}

void tuning(Outcome& o) {
    const ScenarioConfig cfg = scenario();
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const TuneTrace tr =
        tune_alpha([&](double a) { return measured_cost(cfg, d, a, "w1"); }, cfg.es.initial, cfg.es.iterations);
    const double elapsed = seconds_since(t0);
    const double alpha = tr.trailing_mean(cfg.es.window);
    o.check(cfg.es.iterations <= 100, fmt("%g iterations", cfg.es.iterations));
    o.check(std::abs(alpha - 1.60) <= 0.15, fmt("alpha_hat = %.4f", alpha));
    const double J = measured_cost(cfg, d, alpha, "w1");
    o.check(J <= 0.11, fmt("J(alpha_hat) = %.5f", J));
    const double J0 = measured_cost(cfg, d, 0.0, "w1"), J1 = measured_cost(cfg, d, 1.0, "w1");
    o.check(std::abs(J0 / 0.2654 - 1) <= 0.05, fmt("J(0) = %.5f", J0));
    o.check(std::abs(J1 / 0.1256 - 1) <= 0.05, fmt("J(1) = %.5f", J1));
    o.check(elapsed < 300.0, fmt("tuning %.1f s", elapsed));
}

void stability(Outcome& o) {
    const ScenarioConfig cfg = scenario();
    const ScenarioDesigns d = synthesize_scenario(cfg);
    const PlantModel& p = cfg.plant;
    // The loop is block triangular: state feedback, estimation error and the
    // loop of K, whatever alpha is.
    Matrix loopK(2 * p.n(), 2 * p.n());
    loopK << p.A, p.B2 * d.hinf.Cinf, d.hinf.Binf * p.C2, d.hinf.Ainf;
    const double expected = std::max({spectral_abscissa(p.A + p.B2 * d.lqt.F), spectral_abscissa(p.A + cfg.L * p.C2),
                                      spectral_abscissa(loopK)});
    double worst = -1e300, worst_gap = 0.0;
    for (double a : {-10.0, -1.0, 0.0, 0.5, 1.0, 2.0, 10.0}) {
        const double sa = spectral_abscissa(close_loop(p, d.mocc.with_alpha(a).realize()).sys.A);
        worst = std::max(worst, sa);
        worst_gap = std::max(worst_gap, std::abs(sa - expected) / (1 + std::abs(expected)));
    }
    o.check(worst < 0, fmt("max spectral abscissa %.4f", worst));
    o.check(worst_gap <= 1e-6, fmt("vs block spectrum %.1e", worst_gap));
}

struct Criterion {
    int id;
    const char* name;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "synthesis of the example", synthesis},
        {2, "performance table", table},
        {3, "Youla parameter on random plants", youla},
        {4, "closed-loop split on random plants", lemma},
        {5, "performance decompositions", theorems},
        {6, "numerical kernels", kernels},
        {7, "extremum seeking on alpha", tuning},
        {8, "closed-loop stability over alpha", stability},
    };
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (const auto& c : all) {
        if (only && c.id != only) continue;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.check(false, std::string("threw: ") + e.what());
        }
        std::printf("%s %d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
                    o.detail.str().c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed;
}
