#include "mocc/simulation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "mocc/kernels.hpp"

namespace mocc {

namespace {

void header(std::ostream& os, const std::string& name, Index cols, bool always_indexed = false) {
    if (cols == 1 && !always_indexed) {
        os << ',' << name;
        return;
    }
    for (Index i = 0; i < cols; ++i) os << ',' << name << (i + 1);
}

void row(std::ostream& os, const Matrix& m, std::size_t k) {
    for (Index j = 0; j < m.cols(); ++j) os << ',' << m(static_cast<Index>(k), j);
}

}  // namespace

FeedforwardEvaluator::FeedforwardEvaluator(const AnticausalFeedforward& ff, const SignalSpec& r) : ff_(ff) {
    if (r.dependency) throw Error("feedforward: reference must be an independent constant + sinusoid signal");
    spectrum_ = ff_.spectrum(to_spectrum(r));
}

Vector FeedforwardEvaluator::residual(double t, const SignalSpec& r) const {
    PowerSpectrum d = spectrum_;
    for (auto& line : d.lines) line.phasor *= Complex(0.0, line.omega);
    return d.evaluate(t) + ff_.closed_loop.transpose() * spectrum_.evaluate(t) - ff_.drive * r.sample(t);
}

SimulationTrace simulate(const PlantModel& plant, const ControllerSystem& ctrl, const SignalSpec& r,
                         const SignalSpec& w, const SimOptions& opts) {
    if (!(opts.h > 0.0) || !(opts.T > 0.0)) throw Error("simulate: h and T must be positive");
    const double ratio = opts.T / opts.h;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
        throw Error("simulate: T must be an integer multiple of h");
    }
    r.validate();
    w.validate();
    if (r.dependency) throw Error("simulate: the reference cannot depend on another signal");

    const ClosedLoopModel cl = close_loop(plant, ctrl);
    const Index ncl = cl.sys.states();
    const Index m1 = cl.w.size, nr = cl.r.size, nb = cl.b.size;
    if (w.dim() != m1 || r.dim() != nr) throw DimensionError("simulate: signal dimensions do not match the plant");

    StateSpace dep = StateSpace::zero(m1, nr);
    if (w.dependency) dep = *w.dependency;
    const Index nw = dep.states();
    const Index nx = ncl + nw, nv = m1 + nr + nb;

    const Matrix Bw = cl.sys.B.middleCols(cl.w.offset, m1);
    const Matrix Br = cl.sys.B.middleCols(cl.r.offset, nr);
    const Matrix Bb = cl.sys.B.middleCols(cl.b.offset, nb);
    Matrix M = Matrix::Zero(nx, nx), N = Matrix::Zero(nx, nv);
    M.topLeftCorner(ncl, ncl) = cl.sys.A;
    M.topRightCorner(ncl, nw) = Bw * dep.C;
    M.bottomRightCorner(nw, nw) = dep.A;
    N.topLeftCorner(ncl, m1) = Bw;
    N.block(0, m1, ncl, nr) = Bw * dep.D + Br;
    N.topRightCorner(ncl, nb) = Bb;
    N.block(ncl, m1, nw, nr) = dep.B;

    const Index nout = cl.sys.outputs();
    const Matrix Dw = cl.sys.D.middleCols(cl.w.offset, m1);
    Matrix OC(nout, nx), OD(nout, nv);
    OC << cl.sys.C, Dw * dep.C;
    OD << Dw, Dw * dep.D + cl.sys.D.middleCols(cl.r.offset, nr), cl.sys.D.middleCols(cl.b.offset, nb);
    Matrix WC = Matrix::Zero(m1, nx), WD = Matrix::Zero(m1, nv);
    WC.rightCols(nw) = dep.C;
    WD.leftCols(m1).setIdentity();
    WD.middleCols(m1, nr) = dep.D;

    FeedforwardEvaluator bgen;
    if (nb > 0) bgen = FeedforwardEvaluator(*cl.feedforward, r);

    auto exo = [&](double t) {
        Vector v(nv);
        v.head(m1) = w.sample(t);
        v.segment(m1, nr) = r.sample(t);
        if (nb > 0) v.tail(nb) = bgen(t);
        return v;
    };

    SimulationTrace tr;
    tr.h = opts.h;
    tr.T = opts.T;
    tr.steps = steps;
    const std::size_t rows = opts.record ? steps + 1 : 0;
    auto alloc = [rows](Index cols) { return Matrix(static_cast<Index>(rows), cols); };
    if (opts.record) {
        tr.t.resize(static_cast<Index>(rows));
        tr.r = alloc(nr);
        tr.w = alloc(m1);
        tr.y = alloc(cl.y.size);
        tr.u = alloc(cl.u.size);
        tr.u_c = alloc(cl.u_c.size);
        tr.u_q = alloc(cl.u_q.size);
        tr.f = alloc(cl.f.size);
        tr.z = alloc(cl.z.size);
        tr.z_m = alloc(cl.z_m.size);
        tr.x = alloc(cl.n_plant);
        tr.x_ctrl = alloc(cl.n_ctrl);
        tr.x_dep = alloc(nw);
    }

    const auto unx = static_cast<std::size_t>(nx), unv = static_cast<std::size_t>(nv);
    Vector X = Vector::Zero(nx), out(nout), acc(nx), Xs(nx), k(nx), nvt(nx);
    double sum_z = 0.0, sum_zm = 0.0;

    // f(X, v) = M X + N v
    auto deriv = [&](const Vector& state, const Vector& v, Vector& dst) {
        kernels::gemv(M.data(), unx, unx, state.data(), dst.data());
        kernels::gemv(N.data(), unx, unv, v.data(), nvt.data());
        kernels::axpy(1.0, nvt.data(), dst.data(), unx);
    };

    auto sample = [&](std::size_t step, double t, const Vector& v) {
        kernels::gemv(OC.data(), static_cast<std::size_t>(nout), unx, X.data(), out.data());
        Vector dv(nout);
        kernels::gemv(OD.data(), static_cast<std::size_t>(nout), unv, v.data(), dv.data());
        kernels::axpy(1.0, dv.data(), out.data(), static_cast<std::size_t>(nout));
        const double wt = (step == 0 || step == steps) ? 0.5 : 1.0;
        sum_z += wt * kernels::sum_squares(out.data() + cl.z.offset, static_cast<std::size_t>(cl.z.size));
        sum_zm += wt * kernels::sum_squares(out.data() + cl.z_m.offset, static_cast<std::size_t>(cl.z_m.size));
        if (!opts.record) return;
        const auto i = static_cast<Index>(step);
        tr.t(i) = t;
        tr.r.row(i) = v.segment(m1, nr).transpose();
        tr.w.row(i) = (WC * X + WD * v).transpose();
        tr.y.row(i) = out.segment(cl.y.offset, cl.y.size).transpose();
        tr.u.row(i) = out.segment(cl.u.offset, cl.u.size).transpose();
        tr.u_c.row(i) = out.segment(cl.u_c.offset, cl.u_c.size).transpose();
        tr.u_q.row(i) = out.segment(cl.u_q.offset, cl.u_q.size).transpose();
        tr.f.row(i) = out.segment(cl.f.offset, cl.f.size).transpose();
        tr.z.row(i) = out.segment(cl.z.offset, cl.z.size).transpose();
        tr.z_m.row(i) = out.segment(cl.z_m.offset, cl.z_m.size).transpose();
        tr.x.row(i) = X.head(cl.n_plant).transpose();
        tr.x_ctrl.row(i) = X.segment(cl.n_plant, cl.n_ctrl).transpose();
        tr.x_dep.row(i) = X.tail(nw).transpose();
    };

    const double h = opts.h;
    Vector v0 = exo(0.0);
    sample(0, 0.0, v0);
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) * h;
        const double t1 = static_cast<double>(s + 1) * h;
        const Vector vm = exo(t + 0.5 * h);
        const Vector v1 = exo(t1);

        deriv(X, v0, k);
        acc = k;
        Xs = X;
        kernels::axpy(0.5 * h, k.data(), Xs.data(), unx);
        deriv(Xs, vm, k);
        kernels::axpy(2.0, k.data(), acc.data(), unx);
        Xs = X;
        kernels::axpy(0.5 * h, k.data(), Xs.data(), unx);
        deriv(Xs, vm, k);
        kernels::axpy(2.0, k.data(), acc.data(), unx);
        Xs = X;
        kernels::axpy(h, k.data(), Xs.data(), unx);
        deriv(Xs, v1, k);
        kernels::axpy(1.0, k.data(), acc.data(), unx);
        kernels::axpy(h / 6.0, acc.data(), X.data(), unx);

        if (!X.allFinite()) {
            throw Error("simulate: state diverged at t = " + std::to_string(t1) + " (controller " + ctrl.name + ")");
        }
        sample(s + 1, t1, v1);
        v0 = v1;
    }
    tr.cost_z = sum_z * h / opts.T;
    tr.cost_zm = sum_zm * h / opts.T;
    tr.final_state = X;
    return tr;
}

CostReport finite_horizon_cost(const SimulationTrace& trace, const Matrix& C1, const Matrix& D12) {
    if (!trace.recorded()) throw Error("finite_horizon_cost: empty trace");
    const Index rows = trace.t.size();
    const Matrix zm = (trace.y - trace.r) * C1.transpose() + trace.u * D12.transpose();
    const Matrix zt = zm.transpose();  // contiguous per sample
    double acc = 0.0;
    const auto p = static_cast<std::size_t>(zt.rows());
    for (Index i = 0; i < rows; ++i) {
        const double wt = (i == 0 || i == rows - 1) ? 0.5 : 1.0;
        acc += wt * kernels::sum_squares(zt.data() + i * zt.rows(), p);
    }
    return {acc * trace.h / trace.T, trace.T, trace.h};
}

void write_trace_csv(std::ostream& os, const SimulationTrace& tr) {
    os << 't';
    header(os, "r", tr.r.cols());
    header(os, "w", tr.w.cols());
    header(os, "y", tr.y.cols());
    header(os, "u", tr.u.cols());
    header(os, "u_c", tr.u_c.cols());
    header(os, "u_q", tr.u_q.cols());
    header(os, "f", tr.f.cols());
    header(os, "z", tr.z.cols(), true);
    header(os, "z_m", tr.z_m.cols(), true);
    header(os, "x", tr.x.cols(), true);
    header(os, "xk", tr.x_ctrl.cols(), true);
    header(os, "xw", tr.x_dep.cols(), true);
    os << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < tr.t.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        os << tr.t(i);
        for (const Matrix* m : {&tr.r, &tr.w, &tr.y, &tr.u, &tr.u_c, &tr.u_q, &tr.f, &tr.z, &tr.z_m, &tr.x,
                                &tr.x_ctrl, &tr.x_dep}) {
            row(os, *m, k);
        }
        os << '\n';
    }
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_trace_csv(os, trace);
    if (!os) throw Error("write failed for " + path);
}

}  // namespace mocc
