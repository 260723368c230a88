#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mocc/analysis.hpp"
#include "mocc/baselines.hpp"
#include "mocc/simulation.hpp"
#include "mocc/synthesis.hpp"

using namespace mocc;
using namespace mocc::testing;

namespace {

Matrix example_L() {
    Matrix L(2, 1);
    L << -100, -1000;
    return L;
}

}  // namespace

TEST_CASE("LQ tracking gain of the double integrator") {
    // Closed form for x'' = u with weights q = 1 on position and r on u:
    // F = -[1/sqrt(r), sqrt(2/sqrt(r))].
    const PlantModel p = double_integrator_example();
    const LqtDesign d = lqt_synthesize(p);
    const double r = p.R1()(0, 0);
    CHECK(d.F(0, 0) == doctest::Approx(-1.0 / std::sqrt(r)).epsilon(1e-10));
    CHECK(d.F(0, 1) == doctest::Approx(-std::sqrt(2.0 / std::sqrt(r))).epsilon(1e-10));
    CHECK(d.F(0, 0) == doctest::Approx(-33.33).epsilon(0.01));
    CHECK(d.F(0, 1) == doctest::Approx(-8.17).epsilon(0.01));
    CHECK(is_stable(d.closed_loop(p)));
}

TEST_CASE("no performance weight gives a zero design") {
    PlantModel p = double_integrator_example();
    p.A = -Matrix::Identity(2, 2);
    p.C1.setZero();
    const LqtDesign d = lqt_synthesize(p);
    CHECK(d.Pi.norm() < 1e-12);
    CHECK(d.F.norm() < 1e-12);
    CHECK(d.S_ff.norm() < 1e-12);
}

TEST_CASE("LQ gain on random plants satisfies its Riccati equation") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const PlantModel p = random_plant(rng, 1 + trial % 5).plant;
        const LqtDesign d = lqt_synthesize(p);
        CareProblem c{p.A, p.B2, p.Cz().transpose() * p.Cz(), p.R1(), p.Cz().transpose() * p.D12};
        CHECK(care_residual(c, d.Pi) <= 1e-8 * (1.0 + d.Pi.norm()));
        CHECK(is_stable(d.closed_loop(p)));
    }
}

TEST_CASE("minimal tracking cost") {
    const PlantModel p = double_integrator_example();
    const LqtDesign d = lqt_synthesize(p);
    CHECK(lqt_minimal_cost(d, p, SignalSpec::zero(1)) == doctest::Approx(0.0));
    // Table I lists 0.0408 from a 100 s run; the steady-state value is slightly lower.
    CHECK(lqt_minimal_cost(d, p, SignalSpec::sine(1.0, M_PI)) == doctest::Approx(0.0408).epsilon(0.02));
}

TEST_CASE("minimal cost for a constant reference from the stationary feedforward") {
    PlantModel p = double_integrator_example();
    const LqtDesign d = lqt_synthesize(p);
    const double c = 0.7;
    SignalSpec r = SignalSpec::zero(1);
    r.channels[0].offset = c;
    // b = (Af')^{-1} S c, then J = |C1 c|^2 - e' R1^{-1} e with e = B2' b - D12' C1 c.
    const Matrix Af = d.closed_loop(p);
    const Vector b = Af.transpose().fullPivLu().solve(d.S_ff * Vector::Constant(1, c));
    const Vector e = p.B2.transpose() * b - p.D12.transpose() * p.C1 * Vector::Constant(1, c);
    const double expect = (p.C1 * Vector::Constant(1, c)).squaredNorm() - e.dot(d.R1.llt().solve(e));
    CHECK(lqt_minimal_cost(d, p, r) == doctest::Approx(expect).epsilon(1e-10));
    // and against a long run of the LQ tracking loop
    SimOptions o;
    o.T = 200;
    o.h = 2e-3;
    o.record = false;
    const double sim = simulate(p, lqt_controller(p, d, example_L()), r, SignalSpec::zero(1), o).cost_z;
    CHECK(sim == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("minimal cost matches a long simulation of the LQ tracking loop") {
    const PlantModel p = double_integrator_example();
    const LqtDesign d = lqt_synthesize(p);
    const SignalSpec r = SignalSpec::sine(1.0, M_PI);
    SimOptions o;
    o.T = 2000;
    o.h = 2e-3;
    o.record = false;
    const double sim = simulate(p, lqt_controller(p, d, example_L()), r, SignalSpec::zero(1), o).cost_z;
    CHECK(sim == doctest::Approx(lqt_minimal_cost(d, p, r)).epsilon(0.01));
}

TEST_CASE("central H-infinity design of the example") {
    const PlantModel p = double_integrator_example();
    const HinfResult ok = hinf_central(p, 0.4108);
    REQUIRE(ok.feasible());
    CHECK(ok.failure == HinfFailure::none);
    const HinfResult bad = hinf_central(p, 0.40);
    CHECK_FALSE(bad.feasible());
    CHECK(bad.failure != HinfFailure::none);
    CHECK_FALSE(hinf_central(p, -1.0).feasible());

    // The filter Riccati solution vanishes here and the filter gain is the
    // observer gain used in the example.
    CHECK(ok.design->P2.norm() < 1e-9);
    CHECK((ok.design->Linf - example_L()).norm() < 1e-6);

    // Large gamma approaches the LQ design.
    const HinfResult big = hinf_central(p, 1e6);
    REQUIRE(big.feasible());
    CHECK((big.design->P1 - lqt_synthesize(p).Pi).norm() < 1e-6 * (1.0 + big.design->P1.norm()));
}

TEST_CASE("H-infinity feasibility is monotone in gamma") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const PlantModel p = random_plant(rng, 1 + trial % 5).plant;
        const double gmin = hinf_gamma_min(p, 1e-3);
        for (double f : {1.0001, 1.01, 1.1, 1.5, 3.0, 10.0}) {
            CHECK(hinf_central(p, gmin * f + 1e-3).feasible());
        }
    }
}

TEST_CASE("closed-loop norm at gamma_min + 10 tol stays below gamma") {
    Rng rng(43);
    const double tol = 1e-4;
    for (int trial = 0; trial < 8; ++trial) {
        const PlantModel p = random_plant(rng, 1 + trial % 4).plant;
        const double g = hinf_gamma_min(p, tol) + 10 * tol;
        const HinfResult res = hinf_central(p, g);
        REQUIRE(res.feasible());
        const ClosedLoopModel cl = close_loop(p, hinf_controller(*res.design));
        CHECK(hinf_norm(cl.w_to_z()) < g);
    }
}

TEST_CASE("gamma bisection contract") {
    const PlantModel p = double_integrator_example();
    const GammaSearch fine = hinf_gamma_search(p, 1e-4);
    const GammaSearch coarse = hinf_gamma_search(p, 1e-2);
    CHECK(fine.gamma - fine.infeasible <= 1e-4);
    CHECK(hinf_central(p, fine.gamma).feasible());
    CHECK_FALSE(hinf_central(p, fine.infeasible).feasible());
    CHECK(std::abs(fine.gamma - coarse.gamma) <= 1e-2);
}

TEST_CASE("gamma_min shrinks with the regularizers of a scalar plant") {
    // x' = -x + w + u, z = [x; eps u], y = x + eps w
    double prev = 1e9;
    for (double eps : {1e-1, 3e-2, 1e-2, 3e-3}) {
        PlantModel p;
        p.A = -Matrix::Identity(1, 1);
        p.B1 = Matrix::Ones(1, 1);
        p.B2 = Matrix::Ones(1, 1);
        p.C2 = Matrix::Ones(1, 1);
        p.C1 = Matrix::Zero(2, 1);
        p.C1(0, 0) = 1.0;
        p.D12 = Matrix::Zero(2, 1);
        p.D12(1, 0) = eps;
        p.D21 = Matrix::Constant(1, 1, eps);
        const double g = hinf_gamma_min(p, 1e-5);
        CHECK(g < prev);
        prev = g;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("observer gain selection") {
    const PlantModel p = double_integrator_example();
    const Matrix L = pick_observer_gain(p, example_L());
    const CVector ev = sorted_eigenvalues(p.A + L * p.C2);
    CHECK(ev(0).real() == doctest::Approx(-88.73).epsilon(1e-3));
    CHECK(ev(1).real() == doctest::Approx(-11.27).epsilon(1e-3));
    CHECK_THROWS_AS(pick_observer_gain(p, Matrix(Matrix::Zero(2, 1))), StabilityError);

    const Matrix Lw = pick_observer_gain(p, ObserverWeights{Matrix::Identity(2, 2), Matrix::Identity(1, 1)});
    CHECK(is_stable(p.A + Lw * p.C2));

    // Full state measurement with L = B2 Dc for a stabilizing static Dc.
    PlantModel s = p;
    s.C2 = Matrix::Identity(2, 2);
    s.C1 = Matrix::Zero(2, 2);
    s.C1(0, 0) = 1;
    s.D21 = 0.01 * Matrix::Identity(2, 2);
    s.B1 = Matrix::Identity(2, 2);
    Matrix Dc(1, 2);
    Dc << -1, -2;
    CHECK_NOTHROW(pick_observer_gain(s, Matrix(s.B2 * Dc)));
}
