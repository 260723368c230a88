#pragma once

// Residual generator, Youla-type operator Q and the composite two-controller
// structure u = u_c + alpha * Q(f).

#include <optional>
#include <vector>

#include "mocc/controller.hpp"
#include "mocc/synthesis.hpp"

namespace mocc {

/// Output feedback u = K(y) with an optional output-injection gain Lc making
/// Ac + Lc Cc stable (needed when the realization is used as the C block).
struct ControllerRealization {
    StateSpace K;
    std::optional<Matrix> Lc;

    static ControllerRealization static_gain(const Matrix& D) { return {StateSpace::gain(D), std::nullopt}; }
};

/// Joint realization of [N~ M~] = [A + L C2 | B2, L; C2 | 0, I].
struct CoprimeFactors {
    StateSpace joint;
    Index nu = 0;

    StateSpace N() const;
    StateSpace M() const;
    /// f = N~ u - M~ y as one system with inputs [u; y].
    StateSpace residual() const;
};

CoprimeFactors left_coprime_factors(const PlantModel& plant, const Matrix& L);

struct QRealization {
    Matrix Aq;
    Matrix Bq;
    Matrix Cq;
    Matrix Dq;
    double alpha = 1.0;

    Index states() const { return Aq.rows(); }
    /// Realization of alpha * Q (alpha on Cq and Dq only).
    StateSpace system() const;
    void validate(Index nf, Index nu) const;
};

/// Two arbitrary stabilizing output feedbacks C and K.
QRealization build_q_general(const PlantModel& plant, const ControllerRealization& C,
                             const ControllerRealization& K, const Matrix& L);
/// C is the observer-based state feedback u = F x_hat sharing the residual observer.
QRealization build_q_shared(const PlantModel& plant, const Matrix& F, const Matrix& L,
                            const ControllerRealization& K);
/// C is the static gain u = Dc y.
QRealization build_q_static(const PlantModel& plant, const Matrix& Dc, const ControllerRealization& K,
                            const Matrix& L);

enum class CompositeMode { general, shared, static_gain };

const char* to_string(CompositeMode m);

/// LQ tracking feedforward carried by the C block in shared mode:
/// u_c = F x_hat + b_gain b + r_gain r.
struct TrackingFeedforward {
    Matrix b_gain;
    Matrix r_gain;
    AnticausalFeedforward generator;

    static TrackingFeedforward from_lqt(const PlantModel& plant, const LqtDesign& lqt);
};

struct CompositeController {
    CompositeMode mode = CompositeMode::general;
    Matrix A, B2, C2;  // observer model
    Matrix L;
    // C block: general -> (Ac, Bc, Cc, Dc) with Lc; shared -> F; static -> Dc.
    ControllerRealization C;
    Matrix F;
    QRealization Q;
    bool tracking = false;
    std::optional<TrackingFeedforward> feedforward;

    CompositeController with_alpha(double alpha) const;
    /// Causal realization with inputs [y; r; b] and outputs [u; u_c; u_q; f].
    /// State order: general [x_hat; x_c; x_q], shared [x_hat; x_r; x_q], static [x_hat; x_q].
    ControllerSystem realize() const;
};

struct CompositeSpec {
    CompositeMode mode = CompositeMode::general;
    ControllerRealization C;  // general and static modes
    Matrix F;                 // shared mode
    ControllerRealization K;
    Matrix L;
    double alpha = 1.0;
    bool tracking = false;
    std::optional<TrackingFeedforward> feedforward;  // shared mode only
};

/// Builds the Q matching the mode and wraps everything into a composite.
CompositeController assemble_composite(const PlantModel& plant, const CompositeSpec& spec);
/// Same, with a prebuilt Q; DimensionError when Q does not fit the mode.
CompositeController assemble_composite(const PlantModel& plant, const CompositeSpec& spec, QRealization Q);

/// LQT + H-infinity design: shared observer, LQT feedforward, central H-infinity K.
CompositeController lqt_hinf_composite(const PlantModel& plant, const LqtDesign& lqt, const HinfDesign& hinf,
                                       const Matrix& L, double alpha = 1.0);

struct TransferCheck {
    double max_deviation = 0.0;
    std::vector<double> skipped;  // grid points where a pole sits on the axis
};

/// max over the grid of ||K_CQ(jw) - K(jw)|| / (1 + ||K(jw)||), y -> u with r = 0.
TransferCheck verify_transfer_equality(const CompositeController& composite, const StateSpace& K,
                                       const FrequencyGrid& grid);

}  // namespace mocc
