#pragma once

// LQ optimal tracking and central H-infinity output feedback for PlantModel.

#include <optional>
#include <string>
#include <variant>

#include "mocc/lti.hpp"
#include "mocc/riccati.hpp"
#include "mocc/signals.hpp"

namespace mocc {

/// LQ tracking law
///   u = F x_hat - R1^{-1} B2' b + R1^{-1} D12' C1 r,   b' = -(A + B2 F)' b + S_ff r
/// with b the bounded (anticausal) solution.
struct LqtDesign {
    Matrix Pi;
    Matrix F;
    Matrix S_ff;
    Matrix R1;
    Matrix b_gain;  // -R1^{-1} B2'
    Matrix r_gain;  // R1^{-1} D12' C1

    Matrix closed_loop(const PlantModel& plant) const { return plant.A + plant.B2 * F; }
};

LqtDesign lqt_synthesize(const PlantModel& plant, const RiccatiOptions& opts = {});

/// Bounded phasor spectrum of b for the given reference.
PowerSpectrum lqt_feedforward_spectrum(const Matrix& closed_loop, const Matrix& drive, const PowerSpectrum& r);

/// Long-run average of ||C1 r||^2 - ||R1^{-1/2}(B2' b - D12' C1 r)||^2, in closed form.
double lqt_minimal_cost(const LqtDesign& design, const PlantModel& plant, const SignalSpec& r);

struct HinfDesign {
    double gamma = 0.0;
    Matrix P1;
    Matrix P2;
    Matrix Ainf;
    Matrix Binf;
    Matrix Cinf;
    Matrix Linf;

    StateSpace controller() const { return StateSpace(Ainf, Binf, Cinf, Matrix::Zero(Cinf.rows(), Binf.cols())); }
};

enum class HinfFailure {
    none,
    control_riccati,      // no stabilizing P1
    control_indefinite,   // P1 not PSD
    filter_riccati,       // no stabilizing P2
    filter_indefinite,    // P2 not PSD
    coupling,             // rho(P1 P2) >= gamma^2
    bad_gamma,
};

std::string to_string(HinfFailure f);

struct HinfResult {
    std::optional<HinfDesign> design;
    HinfFailure failure = HinfFailure::none;
    std::string detail;

    bool feasible() const { return design.has_value(); }
};

/// Relative margin in the coupling test rho(P1 P2) < gamma^2 (1 - margin).
inline constexpr double kCouplingMargin = 1e-9;

HinfResult hinf_central(const PlantModel& plant, double gamma);

struct GammaSearch {
    double gamma = 0.0;       // smallest feasible gamma found
    double infeasible = 0.0;  // largest infeasible gamma bracketing it
    int iterations = 0;
};

/// Bisection on hinf_central feasibility down to |upper - lower| <= tol.
/// Throws NumericalError if nothing up to 1e6 is feasible.
GammaSearch hinf_gamma_search(const PlantModel& plant, double tol);
double hinf_gamma_min(const PlantModel& plant, double tol);

/// Either an explicit observer gain or the weights (W, V) of the dual CARE
///   A P + P A' - P C2' V^{-1} C2 P + W = 0,   L = -P C2' V^{-1}.
struct ObserverWeights {
    Matrix W;
    Matrix V;
};
using ObserverGainSpec = std::variant<Matrix, ObserverWeights>;

/// Returns an L with A + L C2 stable; StabilityError if a supplied gain fails.
Matrix pick_observer_gain(const PlantModel& plant, const ObserverGainSpec& spec);

}  // namespace mocc
