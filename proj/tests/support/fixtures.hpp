#pragma once

// Random plants and stabilizing controller pairs shared by the test binaries.

#include <random>

#include "mocc/youla.hpp"

namespace mocc::testing {

using Rng = std::mt19937_64;

Matrix randn(Rng& rng, Index rows, Index cols, double scale = 1.0);
/// Random matrix shifted so its spectral abscissa is -margin.
Matrix random_stable(Rng& rng, Index n, double margin = 0.5);

/// Random plant satisfying the standing assumptions. A = S - B2 D0 C2 with S
/// stable, so u = D0 y is a static stabilizing gain (kept in `static_gain`).
struct RandomPlant {
    PlantModel plant;
    Matrix static_gain;
};
RandomPlant random_plant(Rng& rng, Index n);

/// LQ state feedback with random positive weights.
Matrix random_state_feedback(Rng& rng, const PlantModel& p);
/// Observer gain from the dual Riccati equation with random weights.
Matrix random_observer_gain(Rng& rng, const PlantModel& p);

/// u = F x_hat + D (y - C2 x_hat), x_hat' = A x_hat + B2 u + L (C2 x_hat - y).
/// Lc = -B2 makes Ac + Lc Cc = A + L C2.
ControllerRealization observer_controller(const PlantModel& p, const Matrix& F, const Matrix& L, const Matrix& D);

/// Random observer-based controller, optionally with a direct feedthrough.
ControllerRealization random_controller(Rng& rng, const PlantModel& p, bool feedthrough);

/// Static gain near `base` that still stabilizes the plant.
Matrix perturbed_static_gain(Rng& rng, const PlantModel& p, const Matrix& base);

/// Dense log sweep of sigma_max(G(jw)) refined by golden-section search around
/// the best grid point. Independent of the Hamiltonian test in hinf_norm.
double sweep_hinf_norm(const StateSpace& sys, double lo_exp10 = -4, double hi_exp10 = 4, int points = 4000);

/// Largest relative deviation of two transfer functions over the grid.
double max_relative_gap(const StateSpace& a, const StateSpace& b, const FrequencyGrid& grid);

}  // namespace mocc::testing
