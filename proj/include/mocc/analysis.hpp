#pragma once

// Closed-loop structure of the composite controller, H-infinity norms and
// power-seminorm performance measures.

#include <optional>

#include "mocc/controller.hpp"
#include "mocc/youla.hpp"

namespace mocc {

/// Loop of the plant with a composite controller in the coordinates
/// [x; x - x_hat; x_c; x_q], inputs [w; r], output z.
struct ClosedLoopSystem {
    Matrix Abar;
    Matrix B1bar;
    Matrix Brbar;
    Matrix C1bar;
    Matrix Dw;  // D12 (Dc - alpha Dq) D21; zero whenever K is strictly proper
    Matrix Dr;  // -(C1 + D12 Dc)

    StateSpace system() const;
};

/// Block assembly for any mode without LQ feedforward. Shared and static
/// modes are expressed through their equivalent general-mode C block.
ClosedLoopSystem assemble_closed_loop(const PlantModel& plant, const CompositeController& composite);

/// T = [T_z1w, T_z2r]: T_z1w is the loop with K alone (w -> z), T_z2r the
/// loop with C alone (r -> z). T_z2r has inputs [r; b] when C carries an
/// anticausal feedforward.
struct LemmaDecomposition {
    StateSpace T_z1w;
    StateSpace T_z2r;
    std::optional<AnticausalFeedforward> feedforward;

    CMatrix t1(double omega) const;
    CMatrix t2(double omega) const;
};

/// Closed-form realizations for output feedbacks C and K; with tracking the
/// C block is driven by y - r.
LemmaDecomposition decompose_lemma1(const PlantModel& plant, const ControllerRealization& C,
                                    const ControllerRealization& K, bool tracking = true);
/// Same split for arbitrary lowered controllers (e.g. LQ tracking with feedforward).
LemmaDecomposition decompose_lemma1(const PlantModel& plant, const ControllerSystem& C, const ControllerSystem& K);

/// sup_w sigma_max(G(jw)) to relative accuracy tol using the imaginary-axis
/// eigenvalue test on the Hamiltonian. StabilityError for unstable sys.
double hinf_norm(const StateSpace& sys, double tol = 1e-8);

double power_norm_signal(const SignalSpec& s);
double power_norm_response(const StateSpace& sys, const SignalSpec& s);

struct Theorem1Terms {
    double z = 0.0;   // ||z||_P^2 from the joint response
    double z1 = 0.0;  // ||T_z1w w||_P^2
    double z2 = 0.0;  // ||T_z2r r||_P^2
};

/// Error when w and r share a frequency.
Theorem1Terms theorem1_decomposition(const LemmaDecomposition& dec, const SignalSpec& w, const SignalSpec& r);

struct WorstDependency {
    CMatrix W;  // (gamma^2 I - T1* T1)^{-1} T1* T2
    CMatrix M;  // T2* (I - gamma^-2 T1 T1*)^{-1} T2, the pointwise supremum kernel
};

/// NumericalError if gamma <= sigma_max(T_z1w(jw)).
WorstDependency worst_dependency(const LemmaDecomposition& dec, double gamma, double omega);

/// ||(T1 W + T2) v||^2 - gamma^2 ||W v||^2 at one frequency.
double dependency_objective(const LemmaDecomposition& dec, double gamma, double omega, const CMatrix& W,
                            const CVector& v);

struct Theorem2Terms {
    double z = 0.0;         // ||z||_P^2 from the joint response
    double z1 = 0.0;        // ||T_z1w w1||_P^2
    double z2_tilde = 0.0;  // ||(T_z1w W + T_z2r) r||_P^2
    double z2 = 0.0;        // ||T_z2r r||_P^2
    double w = 0.0;         // ||W(r) + w1||_P^2
    double hinf = 0.0;      // ||T_z1w||_inf
    double bound = 0.0;     // hinf^2 * w + z2
    bool bound_holds = false;
};

/// w = W(r) + w1 with w1 frequency-disjoint from r. W may be unstable as
/// long as it has no pole at a frequency of r; its bounded two-sided
/// response is used.
Theorem2Terms theorem2_bound(const LemmaDecomposition& dec, double gamma, const SignalSpec& r, const SignalSpec& w1,
                             const StateSpace& W);

}  // namespace mocc
