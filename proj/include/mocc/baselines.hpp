#pragma once

// Stand-alone controllers the composite design is compared against.

#include "mocc/controller.hpp"
#include "mocc/synthesis.hpp"

namespace mocc {

/// Observer-based LQ tracking controller (the C block used on its own).
ControllerSystem lqt_controller(const PlantModel& plant, const LqtDesign& lqt, const Matrix& L);

/// Central H-infinity output feedback; ignores the reference.
ControllerSystem hinf_controller(const HinfDesign& hinf);

struct DobcDesign {
    Matrix Aw, Cw;     // disturbance model  xi' = Aw xi, w = Cw xi
    Matrix Lchi, Lw;   // joint observer gains
    Matrix F, Fw;
    Matrix b_gain, r_gain;
    AnticausalFeedforward feedforward;
    Matrix error_matrix;
};

/// F_w = -[C2 (A + B2 F)^{-1} B2]^{-1} C2 (A + B2 F)^{-1} B1.
Matrix dobc_compensation_gain(const PlantModel& plant, const Matrix& F);

DobcDesign dobc_synthesize(const PlantModel& plant, const Matrix& Aw, const Matrix& Cw, const Matrix& Lchi,
                           const Matrix& Lw, const LqtDesign& lqt);

/// States [chi_hat; xi_hat]; the residual channel reports y_hat - y.
ControllerSystem dobc_controller(const PlantModel& plant, const DobcDesign& d);

/// Where the feedforward of the H-infinity tracking baseline runs.
enum class HinfFeedforwardForm {
    game,         // b' = -(A + B2 C_inf + gamma^-2 B1 B1' P1)' b + S_inf r
    closed_loop,  // b' = -(A + B2 C_inf)' b + S_inf r
};

struct HinfTrackingDesign {
    HinfDesign hinf;
    HinfFeedforwardForm form = HinfFeedforwardForm::game;
    Matrix S_inf;
    Matrix b_gain, r_gain;
    AnticausalFeedforward feedforward;
};

/// Throws Error when the central design is infeasible at gamma.
HinfTrackingDesign hinf_tracking_synthesize(const PlantModel& plant, double gamma,
                                            HinfFeedforwardForm form = HinfFeedforwardForm::game);

ControllerSystem hinf_tracking_controller(const PlantModel& plant, const HinfTrackingDesign& d);

}  // namespace mocc
