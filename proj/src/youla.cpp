#include "mocc/youla.hpp"

#include <cmath>

namespace mocc {

namespace {

void require_stable(const Matrix& M, const std::string& what) {
    if (M.rows() == 0) return;
    const double a = spectral_abscissa(M);
    if (!(a < -kStabilityMargin)) {
        throw StabilityError(what + " is not stable (spectral abscissa " + std::to_string(a) + ")");
    }
}

void check_k(const PlantModel& plant, const ControllerRealization& K, const char* who) {
    K.K.validate();
    if (K.K.inputs() != plant.p2() || K.K.outputs() != plant.m2()) {
        throw DimensionError(std::string(who) + ": controller must map p2 measurements to m2 controls");
    }
}

// Closed-loop matrix of the plant with output feedback (Ak, Bk, Ck, Dk).
Matrix loop_matrix(const PlantModel& p, const StateSpace& K) {
    const Index n = p.n(), nk = K.states();
    Matrix M(n + nk, n + nk);
    M << p.A + p.B2 * K.D * p.C2, p.B2 * K.C, K.B * p.C2, K.A;
    return M;
}

// Linear map [state; y; r; b] -> signal.
struct Affine {
    Matrix S, Y, R, B;

    static Affine zero(Index rows, Index ns, Index ny, Index nr, Index nb) {
        return {Matrix::Zero(rows, ns), Matrix::Zero(rows, ny), Matrix::Zero(rows, nr), Matrix::Zero(rows, nb)};
    }
    Affine operator+(const Affine& o) const { return {S + o.S, Y + o.Y, R + o.R, B + o.B}; }
    friend Affine operator*(const Matrix& M, const Affine& a) { return {M * a.S, M * a.Y, M * a.R, M * a.B}; }
};

}  // namespace

StateSpace CoprimeFactors::N() const {
    return StateSpace(joint.A, joint.B.leftCols(nu), joint.C, joint.D.leftCols(nu));
}

StateSpace CoprimeFactors::M() const {
    const Index ny = joint.inputs() - nu;
    return StateSpace(joint.A, joint.B.rightCols(ny), joint.C, joint.D.rightCols(ny));
}

StateSpace CoprimeFactors::residual() const {
    const Index ny = joint.inputs() - nu;
    Matrix B = joint.B, D = joint.D;
    B.rightCols(ny) *= -1.0;
    D.rightCols(ny) *= -1.0;
    return StateSpace(joint.A, B, joint.C, D);
}

CoprimeFactors left_coprime_factors(const PlantModel& plant, const Matrix& L) {
    plant.validate();
    const Index n = plant.n(), m2 = plant.m2(), p2 = plant.p2();
    if (L.rows() != n || L.cols() != p2) throw DimensionError("left_coprime_factors: L must be n x p2");
    const Matrix AL = plant.A + L * plant.C2;
    require_stable(AL, "A + L C2");
    Matrix B(n, m2 + p2), D = Matrix::Zero(p2, m2 + p2);
    B << plant.B2, L;
    D.rightCols(p2).setIdentity();
    return {StateSpace(AL, B, plant.C2, D), m2};
}

StateSpace QRealization::system() const { return StateSpace(Aq, Bq, alpha * Cq, alpha * Dq); }

void QRealization::validate(Index nf, Index nu) const {
    const Index nq = Aq.rows();
    if (Aq.cols() != nq || Bq.rows() != nq || Cq.cols() != nq) throw DimensionError("Q: inconsistent state dimension");
    if (Bq.cols() != nf || Dq.cols() != nf) throw DimensionError("Q: must be driven by the residual (p2 columns)");
    if (Cq.rows() != nu || Dq.rows() != nu) throw DimensionError("Q: must produce m2 control outputs");
    if (!std::isfinite(alpha)) throw NumericalError("Q: alpha must be finite");
    require_stable(Aq, "Aq");
}

QRealization build_q_general(const PlantModel& plant, const ControllerRealization& C,
                             const ControllerRealization& K, const Matrix& L) {
    plant.validate();
    check_k(plant, C, "build_q_general (C)");
    check_k(plant, K, "build_q_general (K)");
    require_stable(plant.A + L * plant.C2, "A + L C2");
    require_stable(loop_matrix(plant, C.K), "closed loop with C");
    require_stable(loop_matrix(plant, K.K), "closed loop with K");
    const Index nc = C.K.states();
    const Matrix Lc = C.Lc ? *C.Lc : Matrix::Zero(nc, plant.m2());
    if (Lc.rows() != nc || Lc.cols() != plant.m2()) throw DimensionError("build_q_general: Lc must be nc x m2");
    const Matrix& Ac = C.K.A;
    const Matrix& Bc = C.K.B;
    const Matrix& Cc = C.K.C;
    const Matrix& Dc = C.K.D;
    require_stable(Ac + Lc * Cc, "Ac + Lc Cc");
    const Matrix& Bk = K.K.B;
    const Matrix& Ck = K.K.C;
    const Matrix& Dk = K.K.D;
    const Matrix& B2 = plant.B2;
    const Matrix& C2 = plant.C2;
    const Index n = plant.n(), nk = K.K.states();

    QRealization q;
    q.Dq = Dc - Dk;
    q.Aq = Matrix::Zero(nc + n + nk, nc + n + nk);
    q.Aq.block(0, 0, nc, nc) = Ac + Lc * Cc;
    q.Aq.block(0, nc, nc, n) = (Bc + Lc * q.Dq) * C2;
    q.Aq.block(0, nc + n, nc, nk) = -Lc * Ck;
    q.Aq.block(nc, nc, n + nk, n + nk) = loop_matrix(plant, K.K);
    q.Bq.resize(nc + n + nk, plant.p2());
    q.Bq << -Bc - Lc * q.Dq, L - B2 * Dk, -Bk;
    q.Cq.resize(plant.m2(), nc + n + nk);
    q.Cq << -Cc, -q.Dq * C2, Ck;
    q.validate(plant.p2(), plant.m2());
    return q;
}

QRealization build_q_shared(const PlantModel& plant, const Matrix& F, const Matrix& L,
                            const ControllerRealization& K) {
    plant.validate();
    check_k(plant, K, "build_q_shared");
    if (F.rows() != plant.m2() || F.cols() != plant.n()) throw DimensionError("build_q_shared: F must be m2 x n");
    require_stable(plant.A + plant.B2 * F, "A + B2 F");
    require_stable(plant.A + L * plant.C2, "A + L C2");
    require_stable(loop_matrix(plant, K.K), "closed loop with K");
    const Matrix& Dk = K.K.D;
    QRealization q;
    q.Aq = loop_matrix(plant, K.K);
    q.Bq.resize(q.Aq.rows(), plant.p2());
    q.Bq << L - plant.B2 * Dk, -K.K.B;
    q.Cq.resize(plant.m2(), q.Aq.rows());
    q.Cq << Dk * plant.C2 - F, K.K.C;
    q.Dq = -Dk;
    q.validate(plant.p2(), plant.m2());
    return q;
}

QRealization build_q_static(const PlantModel& plant, const Matrix& Dc, const ControllerRealization& K,
                            const Matrix& L) {
    plant.validate();
    check_k(plant, K, "build_q_static");
    if (Dc.rows() != plant.m2() || Dc.cols() != plant.p2()) throw DimensionError("build_q_static: Dc must be m2 x p2");
    require_stable(plant.A + plant.B2 * Dc * plant.C2, "A + B2 Dc C2");
    require_stable(plant.A + L * plant.C2, "A + L C2");
    require_stable(loop_matrix(plant, K.K), "closed loop with K");
    const Matrix& Dk = K.K.D;
    QRealization q;
    q.Aq = loop_matrix(plant, K.K);
    q.Bq.resize(q.Aq.rows(), plant.p2());
    q.Bq << L - plant.B2 * Dk, -K.K.B;
    q.Cq.resize(plant.m2(), q.Aq.rows());
    q.Cq << (Dk - Dc) * plant.C2, K.K.C;
    q.Dq = Dc - Dk;
    q.validate(plant.p2(), plant.m2());
    return q;
}

const char* to_string(CompositeMode m) {
    switch (m) {
        case CompositeMode::general: return "general";
        case CompositeMode::shared: return "shared";
        case CompositeMode::static_gain: return "static";
    }
    return "unknown";
}

TrackingFeedforward TrackingFeedforward::from_lqt(const PlantModel& plant, const LqtDesign& lqt) {
    return {lqt.b_gain, lqt.r_gain, AnticausalFeedforward{lqt.closed_loop(plant), lqt.S_ff}};
}

CompositeController CompositeController::with_alpha(double alpha) const {
    CompositeController c = *this;
    c.Q.alpha = alpha;
    return c;
}

ControllerSystem CompositeController::realize() const {
    const Index n = A.rows(), ny = C2.rows(), nu = B2.cols(), nq = Q.states();
    const bool use_ff = feedforward.has_value();
    const Index nb = use_ff ? feedforward->generator.dim() : 0;
    const Index nr = ny;
    const double s = tracking ? 1.0 : 0.0;

    Index nc = 0;
    if (mode == CompositeMode::general) nc = C.K.states();
    if (mode == CompositeMode::shared && tracking && !use_ff) nc = n;
    const Index ns = n + nc + nq;
    const Index ix = 0, ic = n, iq = n + nc;

    auto zero = [&](Index rows) { return Affine::zero(rows, ns, ny, nr, nb); };

    Affine f = zero(ny);
    f.S.middleCols(ix, n) = C2;
    f.Y = -Matrix::Identity(ny, ny);

    Affine uq = zero(nu);
    uq.S.middleCols(iq, nq) = Q.Cq;
    uq = uq + Q.Dq * f;
    uq = Matrix(Q.alpha * Matrix::Identity(nu, nu)) * uq;

    Affine uc = zero(nu);
    switch (mode) {
        case CompositeMode::general:
            uc.S.middleCols(ic, nc) = C.K.C;
            uc.Y = C.K.D;
            uc.R = -s * C.K.D;
            break;
        case CompositeMode::shared:
            uc.S.middleCols(ix, n) = F;
            if (nc > 0) uc.S.middleCols(ic, nc) = F;
            if (use_ff) {
                uc.B = feedforward->b_gain;
                uc.R = feedforward->r_gain;
            }
            break;
        case CompositeMode::static_gain:
            uc.Y = C.K.D;
            uc.R = -s * C.K.D;
            break;
    }
    const Affine u = uc + uq;

    // State derivative rows.
    Affine dx = zero(ns);
    {
        Affine obs = B2 * u + L * f;
        obs.S.middleCols(ix, n) += A;
        dx.S.middleRows(ix, n) = obs.S;
        dx.Y.middleRows(ix, n) = obs.Y;
        dx.R.middleRows(ix, n) = obs.R;
        dx.B.middleRows(ix, n) = obs.B;
    }
    if (nc > 0) {
        Affine xc = zero(nc);
        if (mode == CompositeMode::general) {
            const Matrix Lc = C.Lc ? *C.Lc : Matrix::Zero(nc, nu);
            xc.S.middleCols(ic, nc) = C.K.A;
            xc.Y = C.K.B;
            xc.R = -s * C.K.B;
            xc = xc + Matrix(-Lc) * uq;
        } else {
            xc.S.middleCols(ic, nc) = A + L * C2;
            xc.R = L;
        }
        dx.S.middleRows(ic, nc) = xc.S;
        dx.Y.middleRows(ic, nc) = xc.Y;
        dx.R.middleRows(ic, nc) = xc.R;
        dx.B.middleRows(ic, nc) = xc.B;
    }
    {
        Affine xq = Q.Bq * f;
        xq.S.middleCols(iq, nq) += Q.Aq;
        dx.S.middleRows(iq, nq) = xq.S;
        dx.Y.middleRows(iq, nq) = xq.Y;
        dx.R.middleRows(iq, nq) = xq.R;
        dx.B.middleRows(iq, nq) = xq.B;
    }

    const Index nout = 3 * nu + ny;
    Matrix Cm(nout, ns), Dm(nout, ny + nr + nb), Bm(ns, ny + nr + nb);
    Cm << u.S, uc.S, uq.S, f.S;
    Dm << u.Y, u.R, u.B, uc.Y, uc.R, uc.B, uq.Y, uq.R, uq.B, f.Y, f.R, f.B;
    Bm << dx.Y, dx.R, dx.B;

    ControllerSystem cs;
    cs.name = std::string("composite/") + to_string(mode);
    cs.sys = StateSpace(dx.S, Bm, Cm, Dm);
    cs.ny = ny;
    cs.nr = nr;
    cs.nb = nb;
    cs.nu = nu;
    cs.nf = ny;
    if (use_ff) cs.feedforward = feedforward->generator;
    return cs;
}

CompositeController assemble_composite(const PlantModel& plant, const CompositeSpec& spec, QRealization Q) {
    plant.validate();
    Q.alpha = spec.alpha;
    Q.validate(plant.p2(), plant.m2());
    CompositeController c;
    c.mode = spec.mode;
    c.A = plant.A;
    c.B2 = plant.B2;
    c.C2 = plant.C2;
    c.L = spec.L;
    c.C = spec.C;
    c.F = spec.F;
    c.tracking = spec.tracking;
    c.feedforward = spec.feedforward;
    const Index n = plant.n(), nk = spec.K.K.states();
    Index expected = 0;
    switch (spec.mode) {
        case CompositeMode::general:
            expected = spec.C.K.states() + n + nk;
            break;
        case CompositeMode::shared:
            expected = n + nk;
            if (spec.F.rows() != plant.m2() || spec.F.cols() != n) throw DimensionError("composite: F must be m2 x n");
            break;
        case CompositeMode::static_gain:
            expected = n + nk;
            if (spec.C.K.states() != 0) throw DimensionError("composite: static mode needs a static C");
            break;
    }
    if (spec.feedforward && spec.mode != CompositeMode::shared) {
        throw Error("composite: LQ feedforward is only defined for the shared mode");
    }
    if (Q.states() != expected) {
        throw DimensionError(std::string("composite: Q has ") + std::to_string(Q.states()) + " states, " +
                             to_string(spec.mode) + " mode expects " + std::to_string(expected));
    }
    c.Q = std::move(Q);
    return c;
}

CompositeController assemble_composite(const PlantModel& plant, const CompositeSpec& spec) {
    QRealization q;
    switch (spec.mode) {
        case CompositeMode::general: q = build_q_general(plant, spec.C, spec.K, spec.L); break;
        case CompositeMode::shared: q = build_q_shared(plant, spec.F, spec.L, spec.K); break;
        case CompositeMode::static_gain: q = build_q_static(plant, spec.C.K.D, spec.K, spec.L); break;
    }
    return assemble_composite(plant, spec, std::move(q));
}

CompositeController lqt_hinf_composite(const PlantModel& plant, const LqtDesign& lqt, const HinfDesign& hinf,
                                       const Matrix& L, double alpha) {
    CompositeSpec spec;
    spec.mode = CompositeMode::shared;
    spec.F = lqt.F;
    spec.K = ControllerRealization{hinf.controller(), std::nullopt};
    spec.L = L;
    spec.alpha = alpha;
    spec.tracking = true;
    spec.feedforward = TrackingFeedforward::from_lqt(plant, lqt);
    return assemble_composite(plant, spec);
}

TransferCheck verify_transfer_equality(const CompositeController& composite, const StateSpace& K,
                                       const FrequencyGrid& grid) {
    const StateSpace Kcq = composite.realize().feedback_part();
    if (Kcq.inputs() != K.inputs() || Kcq.outputs() != K.outputs()) {
        throw DimensionError("verify_transfer_equality: K dimensions differ from the composite");
    }
    TransferCheck out;
    for (double w : grid) {
        CMatrix a, b;
        try {
            a = frequency_response(Kcq, w);
            b = frequency_response(K, w);
        } catch (const NumericalError&) {
            out.skipped.push_back(w);
            continue;
        }
        out.max_deviation = std::max(out.max_deviation, sigma_max(a - b) / (1.0 + sigma_max(b)));
    }
    return out;
}

}  // namespace mocc
