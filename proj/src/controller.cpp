#include "mocc/controller.hpp"

namespace mocc {

CMatrix AnticausalFeedforward::transfer(double omega) const {
    CMatrix M = closed_loop.transpose().cast<Complex>();
    M.diagonal().array() += Complex(0.0, omega);
    return Eigen::PartialPivLU<CMatrix>(M).solve(drive.cast<Complex>());
}

PowerSpectrum AnticausalFeedforward::spectrum(const PowerSpectrum& r) const {
    if (drive.cols() != r.dim) throw DimensionError("feedforward: drive must be n x dim(r)");
    return map_lines(r, dim(), [&](double w) { return transfer(w); });
}

void ControllerSystem::validate() const {
    sys.validate();
    if (sys.inputs() != ny + nr + nb) throw DimensionError(name + ": inputs must be [y; r; b]");
    if (sys.outputs() != 3 * nu + nf) throw DimensionError(name + ": outputs must be [u; u_c; u_q; f]");
    if (feedforward) {
        if (feedforward->dim() != nb || feedforward->drive.cols() != nr) {
            throw DimensionError(name + ": feedforward dimensions do not match the b input");
        }
        if (!is_stable(feedforward->closed_loop)) throw StabilityError(name + ": feedforward closed loop must be stable");
    } else if (nb != 0) {
        throw DimensionError(name + ": b input without a feedforward generator");
    }
}

StateSpace ControllerSystem::feedback_part() const {
    return StateSpace(sys.A, sys.B.leftCols(ny), sys.C.topRows(nu), sys.D.topLeftCorner(nu, ny));
}

ControllerSystem output_feedback(const StateSpace& K, Index nr, std::string name) {
    K.validate();
    const Index nk = K.states(), ny = K.inputs(), nu = K.outputs();
    ControllerSystem c;
    c.name = std::move(name);
    c.ny = ny;
    c.nr = nr;
    c.nu = nu;
    c.nf = ny;
    Matrix B = Matrix::Zero(nk, ny + nr);
    B.leftCols(ny) = K.B;
    Matrix C = Matrix::Zero(3 * nu + ny, nk);
    C.topRows(nu) = K.C;
    C.middleRows(nu, nu) = K.C;
    Matrix D = Matrix::Zero(3 * nu + ny, ny + nr);
    D.topLeftCorner(nu, ny) = K.D;
    D.block(nu, 0, nu, ny) = K.D;
    c.sys = StateSpace(K.A, B, C, D);
    return c;
}

ClosedLoopModel close_loop(const PlantModel& plant, const ControllerSystem& ctrl) {
    plant.validate();
    ctrl.validate();
    if (ctrl.ny != plant.p2() || ctrl.nu != plant.m2() || ctrl.nr != plant.p2()) {
        throw DimensionError("close_loop: controller " + ctrl.name + " does not match the plant dimensions");
    }
    const Index n = plant.n(), nk = ctrl.sys.states();
    const Index m1 = plant.m1(), nr = ctrl.nr, nb = ctrl.nb, nu = ctrl.nu, nf = ctrl.nf;
    const Index p1 = plant.p1(), p2 = plant.p2();
    const Index nin = m1 + nr + nb;
    const Index nout_ctrl = 3 * nu + nf;

    // Controller outputs in loop coordinates: O = Ox [x; xk] + Oi [w; r; b].
    const Matrix& Ck = ctrl.sys.C;
    const Matrix Dy = ctrl.sys.D.leftCols(ctrl.ny);
    Matrix Ox(nout_ctrl, n + nk), Oi(nout_ctrl, nin);
    Ox << Dy * plant.C2, Ck;
    Oi << Dy * plant.D21, ctrl.sys.D.rightCols(nr + nb);

    const Matrix Bk_y = ctrl.sys.B.leftCols(ctrl.ny);
    Matrix A(n + nk, n + nk), B(n + nk, nin);
    A.topRows(n) = plant.B2 * Ox.topRows(nu);
    A.topLeftCorner(n, n) += plant.A;
    B.topRows(n) = plant.B2 * Oi.topRows(nu);
    B.topLeftCorner(n, m1) += plant.B1;
    A.bottomRows(nk) << Bk_y * plant.C2, ctrl.sys.A;
    B.bottomRows(nk) << Bk_y * plant.D21, ctrl.sys.B.rightCols(nr + nb);

    ClosedLoopModel cl;
    cl.n_plant = n;
    cl.n_ctrl = nk;
    cl.w = {0, m1};
    cl.r = {m1, nr};
    cl.b = {m1 + nr, nb};
    Index off = 0;
    auto take = [&off](Index k) { Slice s{off, k}; off += k; return s; };
    cl.z = take(p1);
    cl.z_m = take(p1);
    cl.y = take(p2);
    cl.u = take(nu);
    cl.u_c = take(nu);
    cl.u_q = take(nu);
    cl.f = take(nf);

    Matrix C = Matrix::Zero(off, n + nk), D = Matrix::Zero(off, nin);
    const Matrix Ux = Ox.topRows(nu), Ui = Oi.topRows(nu);
    // y
    C.block(cl.y.offset, 0, p2, n) = plant.C2;
    D.block(cl.y.offset, 0, p2, m1) = plant.D21;
    // z = C1 C2 x - C1 r + D12 u
    C.middleRows(cl.z.offset, p1) = plant.D12 * Ux;
    C.block(cl.z.offset, 0, p1, n) += plant.Cz();
    D.middleRows(cl.z.offset, p1) = plant.D12 * Ui;
    D.block(cl.z.offset, m1, p1, nr) -= plant.C1;
    // z_m = C1 (y - r) + D12 u
    C.middleRows(cl.z_m.offset, p1) = plant.C1 * C.middleRows(cl.y.offset, p2) + plant.D12 * Ux;
    D.middleRows(cl.z_m.offset, p1) = plant.C1 * D.middleRows(cl.y.offset, p2) + plant.D12 * Ui;
    D.block(cl.z_m.offset, m1, p1, nr) -= plant.C1;
    // u, u_c, u_q, f
    C.middleRows(cl.u.offset, nout_ctrl) = Ox;
    D.middleRows(cl.u.offset, nout_ctrl) = Oi;

    cl.sys = StateSpace(A, B, C, D);
    cl.feedforward = ctrl.feedforward;
    return cl;
}

StateSpace ClosedLoopModel::select(const Slice& out, const Slice& in) const {
    return StateSpace(sys.A, sys.B.middleCols(in.offset, in.size), sys.C.middleRows(out.offset, out.size),
                      sys.D.block(out.offset, in.offset, out.size, in.size));
}

StateSpace ClosedLoopModel::w_to_z() const { return select(z, w); }

CMatrix ClosedLoopModel::response(double omega) const {
    const CMatrix G = frequency_response(sys, omega);
    CMatrix T(G.rows(), w.size + r.size);
    T.leftCols(w.size) = G.middleCols(w.offset, w.size);
    T.rightCols(r.size) = G.middleCols(r.offset, r.size);
    if (feedforward && b.size > 0) T.rightCols(r.size) += G.middleCols(b.offset, b.size) * feedforward->transfer(omega);
    return T;
}

PowerSpectrum ClosedLoopModel::output_spectrum(const PowerSpectrum& w_spec, const PowerSpectrum& r_spec) const {
    if (w_spec.dim != w.size || r_spec.dim != r.size) throw DimensionError("output_spectrum: signal dimensions");
    if (!is_stable(sys.A)) throw StabilityError("output_spectrum: closed loop is not stable");
    return map_lines(stack(w_spec, r_spec), sys.outputs(), [&](double om) { return response(om); });
}

}  // namespace mocc
