#include "mocc/baselines.hpp"

namespace mocc {

namespace {

// Controller with u = Cu s + Ub b + Ur r, residual f = Cf s - y and
// s' = As s + Ay y + Ar r + Ab b.
ControllerSystem pack(std::string name, const Matrix& As, const Matrix& Ay, const Matrix& Ar, const Matrix& Ab,
                      const Matrix& Cu, const Matrix& Ur, const Matrix& Ub, const Matrix& Cf,
                      std::optional<AnticausalFeedforward> ff) {
    const Index ns = As.rows(), ny = Ay.cols(), nr = Ar.cols(), nb = Ab.cols(), nu = Cu.rows();
    Matrix B(ns, ny + nr + nb);
    B << Ay, Ar, Ab;
    Matrix C = Matrix::Zero(3 * nu + ny, ns);
    C.topRows(nu) = Cu;
    C.middleRows(nu, nu) = Cu;
    C.bottomRows(ny) = Cf;
    Matrix D = Matrix::Zero(3 * nu + ny, ny + nr + nb);
    for (Index blk = 0; blk < 2; ++blk) {
        D.block(blk * nu, ny, nu, nr) = Ur;
        D.block(blk * nu, ny + nr, nu, nb) = Ub;
    }
    D.bottomLeftCorner(ny, ny) = -Matrix::Identity(ny, ny);
    ControllerSystem c;
    c.name = std::move(name);
    c.sys = StateSpace(As, B, C, D);
    c.ny = ny;
    c.nr = nr;
    c.nb = nb;
    c.nu = nu;
    c.nf = ny;
    c.feedforward = std::move(ff);
    c.validate();
    return c;
}

}  // namespace

ControllerSystem lqt_controller(const PlantModel& plant, const LqtDesign& lqt, const Matrix& L) {
    const Matrix& A = plant.A;
    const Matrix& B2 = plant.B2;
    const Matrix& C2 = plant.C2;
    if (!is_stable(A + L * C2)) throw StabilityError("lqt_controller: A + L C2 is not stable");
    const AnticausalFeedforward ff{lqt.closed_loop(plant), lqt.S_ff};
    return pack("lqt", A + B2 * lqt.F + L * C2, -L, B2 * lqt.r_gain, B2 * lqt.b_gain, lqt.F, lqt.r_gain, lqt.b_gain,
                C2, ff);
}

ControllerSystem hinf_controller(const HinfDesign& hinf) { return output_feedback(hinf.controller(), hinf.Binf.cols(), "hinf"); }

Matrix dobc_compensation_gain(const PlantModel& plant, const Matrix& F) {
    const Matrix Af = plant.A + plant.B2 * F;
    if (!is_stable(Af)) throw StabilityError("dobc_compensation_gain: A + B2 F is not stable");
    Eigen::FullPivLU<Matrix> af(Af);
    const Matrix G2 = plant.C2 * af.solve(plant.B2);
    const Matrix G1 = plant.C2 * af.solve(plant.B1);
    Eigen::FullPivLU<Matrix> g2(G2);
    if (G2.rows() != G2.cols() || !g2.isInvertible()) {
        throw NumericalError("dobc_compensation_gain: C2 (A + B2 F)^{-1} B2 is singular (zero of u -> y at s = 0)");
    }
    return -g2.solve(G1);
}

DobcDesign dobc_synthesize(const PlantModel& plant, const Matrix& Aw, const Matrix& Cw, const Matrix& Lchi,
                           const Matrix& Lw, const LqtDesign& lqt) {
    plant.validate();
    const Index n = plant.n(), nw = Aw.rows();
    if (Aw.cols() != nw || Cw.rows() != plant.m1() || Cw.cols() != nw) throw DimensionError("dobc: Aw, Cw dimensions");
    if (Lchi.rows() != n || Lchi.cols() != plant.p2() || Lw.rows() != nw || Lw.cols() != plant.p2()) {
        throw DimensionError("dobc: observer gain dimensions");
    }
    DobcDesign d;
    d.Aw = Aw;
    d.Cw = Cw;
    d.Lchi = Lchi;
    d.Lw = Lw;
    d.F = lqt.F;
    d.Fw = dobc_compensation_gain(plant, lqt.F);
    d.b_gain = lqt.b_gain;
    d.r_gain = lqt.r_gain;
    d.feedforward = AnticausalFeedforward{lqt.closed_loop(plant), lqt.S_ff};
    d.error_matrix.resize(n + nw, n + nw);
    d.error_matrix << plant.A + Lchi * plant.C2, plant.B1 * Cw + Lchi * plant.D21 * Cw, Lw * plant.C2,
        Aw + Lw * plant.D21 * Cw;
    if (!is_stable(d.error_matrix)) throw StabilityError("dobc: joint estimation error matrix is not stable");
    return d;
}

ControllerSystem dobc_controller(const PlantModel& plant, const DobcDesign& d) {
    const Index n = plant.n(), nw = d.Aw.rows(), ny = plant.p2();
    // u = F chi + Fw Cw xi + ...,   y_hat - y = C2 chi + D21 Cw xi - y
    Matrix Cu(plant.m2(), n + nw), Cf(ny, n + nw);
    Cu << d.F, d.Fw * d.Cw;
    Cf << plant.C2, plant.D21 * d.Cw;
    Matrix L(n + nw, ny);
    L << d.Lchi, d.Lw;
    Matrix As = L * Cf;
    As.topLeftCorner(n, n) += plant.A;
    As.topRightCorner(n, nw) += plant.B1 * d.Cw;
    As.bottomRightCorner(nw, nw) += d.Aw;
    As.topRows(n) += plant.B2 * Cu;
    Matrix Ar = Matrix::Zero(n + nw, ny), Ab = Matrix::Zero(n + nw, d.feedforward.dim());
    Ar.topRows(n) = plant.B2 * d.r_gain;
    Ab.topRows(n) = plant.B2 * d.b_gain;
    return pack("dobc", As, -L, Ar, Ab, Cu, d.r_gain, d.b_gain, Cf, d.feedforward);
}

HinfTrackingDesign hinf_tracking_synthesize(const PlantModel& plant, double gamma, HinfFeedforwardForm form) {
    const HinfResult res = hinf_central(plant, gamma);
    if (!res.feasible()) throw Error("hinf_tracking: infeasible at gamma = " + std::to_string(gamma) + ": " + res.detail);
    HinfTrackingDesign d;
    d.hinf = *res.design;
    d.form = form;
    const Matrix R1i = plant.R1().llt().solve(Matrix::Identity(plant.m2(), plant.m2()));
    const Matrix PB = d.hinf.P1 * plant.B2 + plant.Cz().transpose() * plant.D12;
    d.S_inf = plant.C2.transpose() * plant.C1.transpose() * plant.C1 - PB * R1i * plant.D12.transpose() * plant.C1;
    d.b_gain = -R1i * plant.B2.transpose();
    d.r_gain = R1i * plant.D12.transpose() * plant.C1;
    Matrix Ab = plant.A + plant.B2 * d.hinf.Cinf;
    if (form == HinfFeedforwardForm::game) Ab += plant.B1 * plant.B1.transpose() * d.hinf.P1 / (gamma * gamma);
    if (!is_stable(Ab)) throw StabilityError("hinf_tracking: feedforward closed-loop matrix is not stable");
    d.feedforward = AnticausalFeedforward{Ab, d.S_inf};
    return d;
}

ControllerSystem hinf_tracking_controller(const PlantModel& plant, const HinfTrackingDesign& d) {
    const HinfDesign& h = d.hinf;
    return pack("hinf-tracking", h.Ainf, h.Binf, plant.B2 * d.r_gain, plant.B2 * d.b_gain, h.Cinf, d.r_gain, d.b_gain,
                plant.C2, d.feedforward);
}

}  // namespace mocc
