#include "fixtures.hpp"

#include <cmath>

#include "mocc/riccati.hpp"
#include "mocc/synthesis.hpp"

namespace mocc::testing {

Matrix randn(Rng& rng, Index rows, Index cols, double scale) {
    std::normal_distribution<double> nd(0.0, scale);
    Matrix M(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) M(i, j) = nd(rng);
    }
    return M;
}

Matrix random_stable(Rng& rng, Index n, double margin) {
    Matrix M = randn(rng, n, n);
    M.diagonal().array() -= spectral_abscissa(M) + margin;
    return M;
}

RandomPlant random_plant(Rng& rng, Index n) {
    std::uniform_int_distribution<int> one_two(1, 2);
    const Index m2 = one_two(rng), p2 = one_two(rng);
    const Index m1 = p2 + one_two(rng) - 1, p1 = p2 + m2;
    RandomPlant rp;
    PlantModel& p = rp.plant;
    p.B2 = randn(rng, n, m2);
    p.C2 = randn(rng, p2, n);
    p.B1 = randn(rng, n, m1);
    rp.static_gain = randn(rng, m2, p2, 0.5);
    p.A = random_stable(rng, n, 0.3) - p.B2 * rp.static_gain * p.C2;
    p.C1 = Matrix::Zero(p1, p2);
    p.C1.topRows(p2) = Matrix::Identity(p2, p2) + randn(rng, p2, p2, 0.2);
    p.D12 = Matrix::Zero(p1, m2);
    p.D12.bottomRows(m2) = Matrix::Identity(m2, m2) * 0.5 + randn(rng, m2, m2, 0.1);
    p.D21 = Matrix::Zero(p2, m1);
    p.D21.leftCols(p2) = Matrix::Identity(p2, p2) * 0.3 + randn(rng, p2, p2, 0.05);
    if (m1 > p2) p.D21.rightCols(m1 - p2) = randn(rng, p2, m1 - p2, 0.1);
    return rp;
}

Matrix random_state_feedback(Rng& rng, const PlantModel& p) {
    const Matrix G = randn(rng, p.n(), p.n());
    const Matrix H = randn(rng, p.m2(), p.m2(), 0.3);
    CareProblem c;
    c.A = p.A;
    c.B = p.B2;
    c.Q = G * G.transpose() + Matrix::Identity(p.n(), p.n());
    c.R = H * H.transpose() + Matrix::Identity(p.m2(), p.m2());
    const Matrix X = solve_care(c);
    return -c.R.llt().solve(p.B2.transpose() * X);
}

Matrix random_observer_gain(Rng& rng, const PlantModel& p) {
    const Matrix G = randn(rng, p.n(), p.n());
    const Matrix H = randn(rng, p.p2(), p.p2(), 0.3);
    return pick_observer_gain(p, ObserverWeights{G * G.transpose() + Matrix::Identity(p.n(), p.n()),
                                                 H * H.transpose() + Matrix::Identity(p.p2(), p.p2())});
}

ControllerRealization observer_controller(const PlantModel& p, const Matrix& F, const Matrix& L, const Matrix& D) {
    const Matrix Ak = p.A + p.B2 * F - p.B2 * D * p.C2 + L * p.C2;
    const Matrix Bk = p.B2 * D - L;
    const Matrix Ck = F - D * p.C2;
    return {StateSpace(Ak, Bk, Ck, D), Matrix(-p.B2)};
}

ControllerRealization random_controller(Rng& rng, const PlantModel& p, bool feedthrough) {
    const Matrix F = random_state_feedback(rng, p);
    const Matrix L = random_observer_gain(rng, p);
    const Matrix D = feedthrough ? randn(rng, p.m2(), p.p2(), 0.2) : Matrix::Zero(p.m2(), p.p2());
    return observer_controller(p, F, L, D);
}

Matrix perturbed_static_gain(Rng& rng, const PlantModel& p, const Matrix& base) {
    for (double s = 0.2; s > 1e-3; s *= 0.5) {
        const Matrix D = base + randn(rng, base.rows(), base.cols(), s);
        if (is_stable(p.A + p.B2 * D * p.C2)) return D;
    }
    return base;
}

double sweep_hinf_norm(const StateSpace& sys, double lo_exp10, double hi_exp10, int points) {
    auto gain = [&](double w) { return sigma_max(frequency_response(sys, w)); };
    double best = gain(0.0), best_w = 0.0;
    const double step = (hi_exp10 - lo_exp10) / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double w = std::pow(10.0, lo_exp10 + step * i);
        const double g = gain(w);
        if (g > best) {
            best = g;
            best_w = w;
        }
    }
    if (best_w > 0.0) {
        // Golden-section refinement on log frequency around the grid maximum.
        double a = std::log10(best_w) - step, b = std::log10(best_w) + step;
        const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int it = 0; it < 100; ++it) {
            const double c = b - phi * (b - a), d = a + phi * (b - a);
            if (gain(std::pow(10.0, c)) > gain(std::pow(10.0, d))) {
                b = d;
            } else {
                a = c;
            }
        }
        best = std::max(best, gain(std::pow(10.0, 0.5 * (a + b))));
    }
    return best;
}

double max_relative_gap(const StateSpace& a, const StateSpace& b, const FrequencyGrid& grid) {
    double worst = 0.0;
    for (double w : grid) {
        const CMatrix ga = frequency_response(a, w), gb = frequency_response(b, w);
        worst = std::max(worst, sigma_max(ga - gb) / (1.0 + sigma_max(gb)));
    }
    return worst;
}

}  // namespace mocc::testing
