#include "mocc/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace mocc {

namespace {

// General-mode C block (Ac, Bc, Cc, Dc, Lc) equivalent to the composite's C.
struct CBlock {
    Matrix Ac, Bc, Cc, Dc, Lc;
};

CBlock c_block(const PlantModel& plant, const CompositeController& c) {
    const Index m2 = plant.m2(), p2 = plant.p2();
    switch (c.mode) {
        case CompositeMode::general: {
            const Index nc = c.C.K.states();
            return {c.C.K.A, c.C.K.B, c.C.K.C, c.C.K.D, c.C.Lc ? *c.C.Lc : Matrix::Zero(nc, m2)};
        }
        case CompositeMode::shared:
            // Observer-based state feedback written as an ordinary output
            // feedback whose state is the shared estimate.
            return {plant.A + plant.B2 * c.F + c.L * plant.C2, -c.L, c.F, Matrix::Zero(m2, p2), -plant.B2};
        case CompositeMode::static_gain:
            return {Matrix(0, 0), Matrix(0, p2), Matrix(m2, 0), c.C.K.D, Matrix(0, m2)};
    }
    throw Error("assemble_closed_loop: unknown mode");
}

PowerSpectrum independent_spectrum(const SignalSpec& s, const char* who) {
    if (s.dependency) throw Error(std::string(who) + ": signal must not carry a dependency filter here");
    return to_spectrum(s);
}

}  // namespace

StateSpace ClosedLoopSystem::system() const {
    Matrix B(Abar.rows(), B1bar.cols() + Brbar.cols()), D(C1bar.rows(), Dw.cols() + Dr.cols());
    B << B1bar, Brbar;
    D << Dw, Dr;
    return StateSpace(Abar, B, C1bar, D);
}

ClosedLoopSystem assemble_closed_loop(const PlantModel& plant, const CompositeController& composite) {
    if (composite.feedforward) {
        throw Error("assemble_closed_loop: the LQ feedforward is anticausal; use close_loop on the realized controller");
    }
    const CBlock cb = c_block(plant, composite);
    const double a = composite.Q.alpha;
    const Matrix Aq = composite.Q.Aq, Bq = composite.Q.Bq, Cq = a * composite.Q.Cq, Dq = a * composite.Q.Dq;
    const Matrix& A = plant.A;
    const Matrix& B1 = plant.B1;
    const Matrix& B2 = plant.B2;
    const Matrix& C2 = plant.C2;
    const Matrix& D12 = plant.D12;
    const Matrix& D21 = plant.D21;
    const Matrix& L = composite.L;
    const Index n = plant.n(), nc = cb.Ac.rows(), nq = Aq.rows();
    const double s = composite.tracking ? 1.0 : 0.0;

    ClosedLoopSystem cl;
    const Index N = 2 * n + nc + nq;
    cl.Abar = Matrix::Zero(N, N);
    const Index i0 = 0, i1 = n, i2 = 2 * n, i3 = 2 * n + nc;
    cl.Abar.block(i0, i0, n, n) = A + B2 * cb.Dc * C2;
    cl.Abar.block(i0, i1, n, n) = -B2 * Dq * C2;
    cl.Abar.block(i0, i2, n, nc) = B2 * cb.Cc;
    cl.Abar.block(i0, i3, n, nq) = B2 * Cq;
    cl.Abar.block(i1, i1, n, n) = A + L * C2;
    cl.Abar.block(i2, i0, nc, n) = cb.Bc * C2;
    cl.Abar.block(i2, i1, nc, n) = cb.Lc * Dq * C2;
    cl.Abar.block(i2, i2, nc, nc) = cb.Ac;
    cl.Abar.block(i2, i3, nc, nq) = -cb.Lc * Cq;
    cl.Abar.block(i3, i1, nq, n) = -Bq * C2;
    cl.Abar.block(i3, i3, nq, nq) = Aq;

    cl.B1bar.resize(N, plant.m1());
    cl.B1bar << B1 + B2 * (cb.Dc - Dq) * D21, B1 + L * D21, (cb.Bc + cb.Lc * Dq) * D21, -Bq * D21;
    cl.Brbar = Matrix::Zero(N, plant.p2());
    cl.Brbar.block(i0, 0, n, plant.p2()) = -s * B2 * cb.Dc;
    cl.Brbar.block(i2, 0, nc, plant.p2()) = -s * cb.Bc;

    const Matrix Cs = plant.C1 + D12 * cb.Dc;
    cl.C1bar.resize(plant.p1(), N);
    cl.C1bar << Cs * C2, -D12 * Dq * C2, D12 * cb.Cc, D12 * Cq;
    cl.Dw = D12 * (cb.Dc - Dq) * D21;
    cl.Dr = -(plant.C1 + s * D12 * cb.Dc);

    if (!is_stable(cl.Abar)) throw StabilityError("assemble_closed_loop: closed loop is not stable");
    return cl;
}

CMatrix LemmaDecomposition::t1(double omega) const { return frequency_response(T_z1w, omega); }

CMatrix LemmaDecomposition::t2(double omega) const {
    const CMatrix G = frequency_response(T_z2r, omega);
    if (!feedforward) return G;
    const Index nr = feedforward->drive.cols(), nb = feedforward->dim();
    return G.leftCols(nr) + G.rightCols(nb) * feedforward->transfer(omega);
}

LemmaDecomposition decompose_lemma1(const PlantModel& plant, const ControllerRealization& C,
                                    const ControllerRealization& K, bool tracking) {
    plant.validate();
    const Matrix& A = plant.A;
    const Matrix& B1 = plant.B1;
    const Matrix& B2 = plant.B2;
    const Matrix& C2 = plant.C2;
    const Matrix& D12 = plant.D12;
    const Matrix& D21 = plant.D21;
    const Matrix Cz = plant.Cz();
    const double s = tracking ? 1.0 : 0.0;
    LemmaDecomposition dec;
    {
        const StateSpace& k = K.K;
        const Index n = plant.n(), nk = k.states();
        Matrix Acl(n + nk, n + nk), Bcl(n + nk, plant.m1()), Ccl(plant.p1(), n + nk);
        Acl << A + B2 * k.D * C2, B2 * k.C, k.B * C2, k.A;
        Bcl << B1 + B2 * k.D * D21, k.B * D21;
        Ccl << Cz + D12 * k.D * C2, D12 * k.C;
        dec.T_z1w = StateSpace(Acl, Bcl, Ccl, D12 * k.D * D21);
    }
    {
        const StateSpace& c = C.K;
        const Index n = plant.n(), nc = c.states();
        Matrix Acl(n + nc, n + nc), Bcl(n + nc, plant.p2()), Ccl(plant.p1(), n + nc);
        Acl << A + B2 * c.D * C2, B2 * c.C, c.B * C2, c.A;
        Bcl << -s * B2 * c.D, -s * c.B;
        Ccl << Cz + D12 * c.D * C2, D12 * c.C;
        dec.T_z2r = StateSpace(Acl, Bcl, Ccl, -(plant.C1 + s * D12 * c.D));
    }
    if (!is_stable(dec.T_z1w.A)) throw StabilityError("decompose_lemma1: K does not stabilize the plant");
    if (!is_stable(dec.T_z2r.A)) throw StabilityError("decompose_lemma1: C does not stabilize the plant");
    return dec;
}

LemmaDecomposition decompose_lemma1(const PlantModel& plant, const ControllerSystem& C, const ControllerSystem& K) {
    const ClosedLoopModel lk = close_loop(plant, K);
    const ClosedLoopModel lc = close_loop(plant, C);
    if (!is_stable(lk.sys.A)) throw StabilityError("decompose_lemma1: K does not stabilize the plant");
    if (!is_stable(lc.sys.A)) throw StabilityError("decompose_lemma1: C does not stabilize the plant");
    LemmaDecomposition dec;
    dec.T_z1w = lk.w_to_z();
    dec.T_z2r = lc.select(lc.z, Slice{lc.r.offset, lc.r.size + lc.b.size});
    dec.feedforward = lc.feedforward;
    return dec;
}

double hinf_norm(const StateSpace& sys, double tol) {
    sys.validate();
    if (!(tol > 0.0)) throw Error("hinf_norm: tol must be positive");
    const Index n = sys.states(), m = sys.inputs(), p = sys.outputs();
    const double d_norm = sigma_max(sys.D.cast<Complex>());
    if (n == 0 || m == 0 || p == 0) return d_norm;
    if (!is_stable(sys.A)) throw StabilityError("hinf_norm: system is not stable");

    const Matrix &A = sys.A, &B = sys.B, &C = sys.C, &D = sys.D;
    auto sigma_at = [&](double w) { return sigma_max(frequency_response(sys, w)); };

    double lb = std::max(d_norm, sigma_at(0.0));
    {
        const CVector ev = A.eigenvalues();
        for (Index i = 0; i < ev.size(); ++i) {
            lb = std::max(lb, sigma_at(std::abs(ev(i).imag())));
            lb = std::max(lb, sigma_at(std::abs(ev(i))));
        }
    }
    if (lb == 0.0) return 0.0;

    for (int iter = 0; iter < 200; ++iter) {
        const double g = (1.0 + 2.0 * tol) * lb;
        const Matrix R = D.transpose() * D - g * g * Matrix::Identity(m, m);
        const Matrix S = D * D.transpose() - g * g * Matrix::Identity(p, p);
        const Matrix Ri = R.inverse();
        const Matrix Ah = A - B * Ri * D.transpose() * C;
        Matrix H(2 * n, 2 * n);
        H << Ah, -g * B * Ri * B.transpose(), g * C.transpose() * S.inverse() * C, -Ah.transpose();
        const CVector ev = H.eigenvalues();
        std::vector<double> omegas;
        for (Index i = 0; i < ev.size(); ++i) {
            const double mag = std::abs(ev(i));
            if (std::abs(ev(i).real()) <= 1e-7 * std::max(1.0, mag) && ev(i).imag() >= 0.0) {
                omegas.push_back(ev(i).imag());
            }
        }
        if (omegas.empty()) return lb;
        std::sort(omegas.begin(), omegas.end());
        double best = lb;
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            best = std::max(best, sigma_at(omegas[i]));
            if (i + 1 < omegas.size()) best = std::max(best, sigma_at(0.5 * (omegas[i] + omegas[i + 1])));
        }
        if (best <= g) return lb;  // crossings found only through rounding; norm is within tolerance
        lb = best;
    }
    return lb;
}

double power_norm_signal(const SignalSpec& s) { return std::sqrt(independent_spectrum(s, "power_norm_signal").power_squared()); }

double power_norm_response(const StateSpace& sys, const SignalSpec& s) {
    if (!is_stable(sys.A) && sys.states() > 0) throw StabilityError("power_norm_response: system is not stable");
    return std::sqrt(respond(sys, independent_spectrum(s, "power_norm_response")).power_squared());
}

Theorem1Terms theorem1_decomposition(const LemmaDecomposition& dec, const SignalSpec& w, const SignalSpec& r) {
    const PowerSpectrum ws = independent_spectrum(w, "theorem1_decomposition");
    const PowerSpectrum rs = independent_spectrum(r, "theorem1_decomposition");
    if (!orthogonal(ws, rs)) throw Error("theorem1_decomposition: w and r are not orthogonal (shared frequency)");
    const Index p = dec.T_z1w.outputs();
    Theorem1Terms t;
    t.z1 = map_lines(ws, p, [&](double om) { return dec.t1(om); }).power_squared();
    t.z2 = map_lines(rs, p, [&](double om) { return dec.t2(om); }).power_squared();
    t.z = map_lines(stack(ws, rs), p, [&](double om) {
              CMatrix T(p, ws.dim + rs.dim);
              T << dec.t1(om), dec.t2(om);
              return T;
          }).power_squared();
    return t;
}

WorstDependency worst_dependency(const LemmaDecomposition& dec, double gamma, double omega) {
    const CMatrix T1 = dec.t1(omega), T2 = dec.t2(omega);
    const double s1 = sigma_max(T1);
    if (!(gamma > s1)) {
        throw NumericalError("worst_dependency: gamma must exceed sigma_max(T_z1w(jw)) = " + std::to_string(s1));
    }
    const Index m = T1.cols(), p = T1.rows();
    WorstDependency out;
    const CMatrix G = gamma * gamma * CMatrix::Identity(m, m) - T1.adjoint() * T1;
    out.W = G.partialPivLu().solve(T1.adjoint() * T2);
    const CMatrix E = CMatrix::Identity(p, p) - (T1 * T1.adjoint()) / (gamma * gamma);
    out.M = T2.adjoint() * E.partialPivLu().solve(T2);
    return out;
}

double dependency_objective(const LemmaDecomposition& dec, double gamma, double omega, const CMatrix& W,
                            const CVector& v) {
    const CMatrix T1 = dec.t1(omega), T2 = dec.t2(omega);
    const CVector Wv = W * v;
    return (T1 * Wv + T2 * v).squaredNorm() - gamma * gamma * Wv.squaredNorm();
}

Theorem2Terms theorem2_bound(const LemmaDecomposition& dec, double gamma, const SignalSpec& r, const SignalSpec& w1,
                             const StateSpace& W) {
    W.validate();
    const PowerSpectrum rs = independent_spectrum(r, "theorem2_bound");
    const PowerSpectrum ws1 = independent_spectrum(w1, "theorem2_bound");
    if (W.inputs() != rs.dim || W.outputs() != ws1.dim) throw DimensionError("theorem2_bound: W must map r to w");
    const PowerSpectrum wr = respond(W, rs);
    if (!orthogonal(ws1, rs) || !orthogonal(ws1, wr)) {
        throw Error("theorem2_bound: w1 must be frequency-disjoint from r and W(r)");
    }
    const Index p = dec.T_z1w.outputs();
    Theorem2Terms t;
    t.hinf = hinf_norm(dec.T_z1w);
    if (!(t.hinf < gamma)) throw Error("theorem2_bound: ||T_z1w||_inf must be below gamma");
    t.z1 = map_lines(ws1, p, [&](double om) { return dec.t1(om); }).power_squared();
    t.z2 = map_lines(rs, p, [&](double om) { return dec.t2(om); }).power_squared();
    t.z2_tilde = map_lines(rs, p, [&](double om) {
                     return CMatrix(dec.t1(om) * frequency_response(W, om) + dec.t2(om));
                 }).power_squared();
    const PowerSpectrum w_total = add(ws1, wr);
    t.w = w_total.power_squared();
    t.z = map_lines(stack(w_total, rs), p, [&](double om) {
              CMatrix T(p, w_total.dim + rs.dim);
              T << dec.t1(om), dec.t2(om);
              return T;
          }).power_squared();
    t.bound = t.hinf * t.hinf * t.w + t.z2;
    t.bound_holds = t.z <= t.bound;
    return t;
}

}  // namespace mocc
