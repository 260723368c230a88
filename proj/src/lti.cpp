#include "mocc/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace mocc {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string dims(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

// Orthonormal basis of the range of M, rank decided by singular values above tol.
Matrix orth(const Matrix& M, double tol) {
    if (M.cols() == 0 || M.rows() == 0) return Matrix(M.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
    const auto& s = svd.singularValues();
    Index r = 0;
    while (r < s.size() && s(r) > tol) ++r;
    return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the controllable subspace of (A, B).
Matrix controllable_basis(const Matrix& A, const Matrix& B, double tol) {
    const Index n = A.rows();
    const double scale = std::max({1.0, A.norm(), B.norm()});
    Matrix V = orth(B, tol * scale);
    Matrix last = V;
    while (V.cols() < n && last.cols() > 0) {
        Matrix W = A * last;
        // Two passes of classical Gram-Schmidt against the current basis.
        for (int pass = 0; pass < 2; ++pass) W -= V * (V.transpose() * W);
        Matrix fresh = orth(W, tol * scale);
        if (fresh.cols() == 0) break;
        // Re-orthogonalize the new directions and append.
        fresh -= V * (V.transpose() * fresh);
        fresh = orth(fresh, tol * scale);
        if (fresh.cols() == 0) break;
        Matrix grown(n, V.cols() + fresh.cols());
        grown << V, fresh;
        V = std::move(grown);
        last = std::move(fresh);
    }
    return V;
}

// Orthonormal basis of the orthogonal complement of range(V) in R^n.
Matrix complement(const Matrix& V, Index n) {
    if (V.cols() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(n - V.cols());
}

// Zeros of a tall system (p > m) whose D has full column rank: the
// unobservable modes of (Dperp' C, A - B D^+ C).
CVector tall_zeros(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
    const Index n = A.rows();
    Eigen::JacobiSVD<Matrix> svd(D, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Index m = D.cols();
    const double dtol = 1e-12 * std::max(1.0, D.norm());
    for (Index i = 0; i < m; ++i) {
        if (svd.singularValues()(i) <= dtol) {
            throw NumericalError("invariant_zeros: D lacks full column rank for a tall pencil");
        }
    }
    const Matrix pinv = (D.transpose() * D).ldlt().solve(D.transpose());
    const Matrix perp = svd.matrixU().rightCols(D.rows() - m);
    const Matrix At = A - B * pinv * C;
    const Matrix Co = perp.transpose() * C;
    const Matrix obs = controllable_basis(At.transpose(), Co.transpose(), 1e-10);
    const Matrix U = complement(obs, n);
    if (U.cols() == 0) return CVector(0);
    return sorted_eigenvalues(U.transpose() * At * U);
}

}  // namespace

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
    validate();
}

StateSpace StateSpace::gain(const Matrix& d) {
    return StateSpace(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

StateSpace StateSpace::zero(Index outputs, Index inputs) {
    return gain(Matrix::Zero(outputs, inputs));
}

void StateSpace::validate() const {
    if (A.rows() != A.cols()) throw DimensionError("StateSpace: A must be square, got " + dims(A));
    if (B.rows() != A.rows()) throw DimensionError("StateSpace: B rows must equal A rows, got " + dims(B));
    if (C.cols() != A.cols()) throw DimensionError("StateSpace: C cols must equal A cols, got " + dims(C));
    if (D.rows() != C.rows() || D.cols() != B.cols()) {
        throw DimensionError("StateSpace: D must be " + std::to_string(C.rows()) + "x" +
                             std::to_string(B.cols()) + ", got " + dims(D));
    }
    if (!all_finite(A) || !all_finite(B) || !all_finite(C) || !all_finite(D)) {
        throw NumericalError("StateSpace: non-finite entry");
    }
}

void PlantModel::validate() const {
    const Index nx = A.rows();
    auto need = [](bool ok, const char* what) {
        if (!ok) throw DimensionError(std::string("PlantModel: ") + what);
    };
    need(A.cols() == nx, "A must be square");
    need(B1.rows() == nx, "B1 rows must equal n");
    need(B2.rows() == nx, "B2 rows must equal n");
    need(C2.cols() == nx, "C2 cols must equal n");
    need(C1.cols() == C2.rows(), "C1 cols must equal C2 rows (p2)");
    need(D12.rows() == C1.rows() && D12.cols() == B2.cols(), "D12 must be p1 x m2");
    need(D21.rows() == C2.rows() && D21.cols() == B1.cols(), "D21 must be p2 x m1");
    for (const Matrix* m : {&A, &B1, &B2, &C1, &C2, &D12, &D21}) {
        if (!m->allFinite()) throw NumericalError("PlantModel: non-finite entry");
    }
}

PlantModel double_integrator_example() {
    PlantModel p;
    p.A = (Matrix(2, 2) << 0, 1, 0, 0).finished();
    p.B1 = (Matrix(2, 1) << 1, 10).finished();
    p.B2 = (Matrix(2, 1) << 0, 1).finished();
    p.C1 = (Matrix(2, 1) << 1, 0).finished();
    p.C2 = (Matrix(1, 2) << 1, 0).finished();
    p.D12 = (Matrix(2, 1) << 0, 0.03).finished();
    p.D21 = (Matrix(1, 1) << 0.01).finished();
    return p;
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {
    for (std::size_t i = 0; i < omegas_.size(); ++i) {
        if (!std::isfinite(omegas_[i]) || omegas_[i] < 0.0) {
            throw Error("FrequencyGrid: frequencies must be finite and non-negative");
        }
        if (i > 0 && !(omegas_[i] > omegas_[i - 1])) {
            throw Error("FrequencyGrid: frequencies must be strictly increasing");
        }
    }
}

FrequencyGrid FrequencyGrid::logspace(double lo_exp10, double hi_exp10, std::size_t points) {
    std::vector<double> w(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        w[i] = std::pow(10.0, lo_exp10 + t * (hi_exp10 - lo_exp10));
    }
    return FrequencyGrid(std::move(w));
}

CVector sorted_eigenvalues(const Matrix& M) {
    if (M.rows() != M.cols()) throw DimensionError("eigenvalues: matrix must be square");
    if (!M.allFinite()) throw NumericalError("eigenvalues: non-finite input");
    if (M.rows() == 0) return CVector(0);
    Eigen::EigenSolver<Matrix> es(M, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigenvalues: decomposition failed");
    CVector ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

double spectral_abscissa(const Matrix& M) {
    const CVector ev = sorted_eigenvalues(M);
    if (ev.size() == 0) return -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) best = std::max(best, ev(i).real());
    return best;
}

bool is_stable(const Matrix& M) { return spectral_abscissa(M) < -kStabilityMargin; }

StabilizabilityReport check_stabilizable_detectable(const PlantModel& plant) {
    plant.validate();
    const Index n = plant.n();
    const CVector ev = sorted_eigenvalues(plant.A);
    const double tol = 1e-9 * std::max(1.0, plant.A.norm());
    StabilizabilityReport rep{true, true};
    for (Index i = 0; i < ev.size(); ++i) {
        if (ev(i).real() < -kStabilityMargin) continue;
        const CMatrix shifted = plant.A.cast<Complex>() - ev(i) * CMatrix::Identity(n, n);
        CMatrix ctrl(n, n + plant.m2());
        ctrl << shifted, plant.B2.cast<Complex>();
        CMatrix obs(n + plant.p2(), n);
        obs << shifted, plant.C2.cast<Complex>();
        Eigen::JacobiSVD<CMatrix> sc(ctrl);
        Eigen::JacobiSVD<CMatrix> so(obs);
        if (sc.singularValues()(n - 1) <= tol) rep.stabilizable = false;
        if (so.singularValues()(n - 1) <= tol) rep.detectable = false;
    }
    return rep;
}

CVector invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D) {
    StateSpace(A, B, C, D);  // validates
    const Index n = A.rows(), m = B.cols(), p = C.rows();
    if (p > m) return tall_zeros(A, B, C, D);
    if (p < m) {
        return tall_zeros(A.transpose(), C.transpose(), B.transpose(), D.transpose());
    }
    Matrix M(n + p, n + m);
    M << A, B, C, D;
    Matrix N = Matrix::Zero(n + p, n + m);
    N.topLeftCorner(n, n).setIdentity();
    Eigen::GeneralizedEigenSolver<Matrix> ges(M, N, false);
    if (ges.info() != Eigen::Success) throw NumericalError("invariant_zeros: QZ failed");
    const auto alphas = ges.alphas();
    const auto betas = ges.betas();
    const double scale = std::max(1.0, M.norm());
    std::vector<Complex> zs;
    for (Index i = 0; i < alphas.size(); ++i) {
        if (std::abs(betas(i)) > 1e-10 * std::max(scale, std::abs(alphas(i)))) {
            zs.push_back(alphas(i) / betas(i));
        }
    }
    std::sort(zs.begin(), zs.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    CVector out(static_cast<Index>(zs.size()));
    for (std::size_t i = 0; i < zs.size(); ++i) out(static_cast<Index>(i)) = zs[i];
    return out;
}

namespace {

AssumptionItem zeros_off_axis(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                              const char* label) {
    AssumptionItem item;
    try {
        const CVector z = invariant_zeros(A, B, C, D);
        item.passed = true;
        std::ostringstream os;
        os << label << ": " << z.size() << " invariant zero(s)";
        for (Index i = 0; i < z.size(); ++i) {
            if (std::abs(z(i).real()) < 1e-8) {
                item.passed = false;
                os << "; zero on imaginary axis at " << z(i);
            }
        }
        item.detail = os.str();
    } catch (const NumericalError& e) {
        item.passed = false;
        item.detail = std::string(label) + ": not evaluated (" + e.what() + ")";
    }
    return item;
}

bool positive_definite(const Matrix& M) {
    if (M.rows() == 0) return true;
    if ((M - M.transpose()).norm() > 1e-12 * std::max(1.0, M.norm())) return false;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    return es.eigenvalues().minCoeff() > 1e-14 * std::max(1.0, M.norm());
}

}  // namespace

StandardAssumptionsReport check_standard_assumptions(const PlantModel& plant) {
    plant.validate();
    StandardAssumptionsReport rep;
    rep.measurement_rank = zeros_off_axis(plant.A, plant.B1, plant.C2, plant.D21, "(A,B1,C2,D21)");
    rep.control_rank = zeros_off_axis(plant.A, plant.B2, plant.Cz(), plant.D12, "(A,B2,C1C2,D12)");
    const bool r1 = positive_definite(plant.R1());
    const bool r2 = positive_definite(plant.R2());
    rep.weights_positive.passed = r1 && r2;
    rep.weights_positive.detail = std::string("R1 ") + (r1 ? "> 0" : "not positive definite") +
                                  ", R2 " + (r2 ? "> 0" : "not positive definite");
    return rep;
}

double sigma_max(const CMatrix& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<CMatrix>(M).singularValues()(0);
}

CMatrix frequency_response(const StateSpace& sys, double omega) {
    const Index n = sys.states();
    if (n == 0) return sys.D.cast<Complex>();
    CMatrix M = -sys.A.cast<Complex>();
    M.diagonal().array() += Complex(0.0, omega);
    Eigen::PartialPivLU<CMatrix> lu(M);
    const double rc = lu.rcond();
    if (!(rc > 1e-14)) {
        throw NumericalError("frequency_response: pole on the imaginary axis at omega = " +
                             std::to_string(omega));
    }
    return sys.C.cast<Complex>() * lu.solve(sys.B.cast<Complex>()) + sys.D.cast<Complex>();
}

StateSpace interconnect_feedback(const StateSpace& G, const StateSpace& K, int sign) {
    if (sign != 1 && sign != -1) throw Error("interconnect_feedback: sign must be +1 or -1");
    if (K.inputs() != G.outputs() || K.outputs() != G.inputs()) {
        throw DimensionError("interconnect_feedback: K must map G's outputs to G's inputs");
    }
    const double s = sign;
    const Index ng = G.states(), nk = K.states(), m = G.inputs(), p = G.outputs();
    // y = Cg xg + Dg (v + s(Ck xk + Dk y))  =>  E y = Cg xg + s Dg Ck xk + Dg v
    const Matrix E = Matrix::Identity(p, p) - s * G.D * K.D;
    Eigen::FullPivLU<Matrix> lu(E);
    if (!lu.isInvertible()) throw NumericalError("interconnect_feedback: algebraic loop is singular");
    const Matrix Ei = lu.inverse();
    const Matrix Yx = Ei * G.C;             // y from xg
    const Matrix Yk = s * Ei * G.D * K.C;   // y from xk
    const Matrix Yv = Ei * G.D;             // y from v
    // u = v + s (Ck xk + Dk y)
    const Matrix Ux = s * K.D * Yx;
    const Matrix Uk = s * (K.C + K.D * Yk);
    const Matrix Uv = Matrix::Identity(m, m) + s * K.D * Yv;

    Matrix A(ng + nk, ng + nk), B(ng + nk, m), C(p, ng + nk);
    A.topLeftCorner(ng, ng) = G.A + G.B * Ux;
    A.topRightCorner(ng, nk) = G.B * Uk;
    A.bottomLeftCorner(nk, ng) = K.B * Yx;
    A.bottomRightCorner(nk, nk) = K.A + K.B * Yk;
    B.topRows(ng) = G.B * Uv;
    B.bottomRows(nk) = K.B * Yv;
    C.leftCols(ng) = Yx;
    C.rightCols(nk) = Yk;
    return StateSpace(A, B, C, Yv);
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
    if (second.inputs() != first.outputs()) throw DimensionError("series: dimension mismatch");
    const Index n1 = first.states(), n2 = second.states();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = first.A;
    A.bottomLeftCorner(n2, n1) = second.B * first.C;
    A.bottomRightCorner(n2, n2) = second.A;
    Matrix B(n1 + n2, first.inputs());
    B << first.B, second.B * first.D;
    Matrix C(second.outputs(), n1 + n2);
    C << second.D * first.C, second.C;
    return StateSpace(A, B, C, second.D * first.D);
}

StateSpace similarity_transform(const StateSpace& sys, const Matrix& T) {
    if (T.rows() != sys.states() || T.cols() != sys.states()) {
        throw DimensionError("similarity_transform: T must be n x n");
    }
    Eigen::FullPivLU<Matrix> lu(T);
    if (!lu.isInvertible()) throw NumericalError("similarity_transform: T is singular");
    const Matrix Ti = lu.inverse();
    return StateSpace(T * sys.A * Ti, T * sys.B, sys.C * Ti, sys.D);
}

DiscretePropagator exact_discretize(const StateSpace& sys, double h) {
    if (!(h > 0.0)) throw Error("exact_discretize: step must be positive");
    const Index n = sys.states(), m = sys.inputs();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A * h;
    aug.topRightCorner(n, m) = sys.B * h;
    const Matrix E = aug.exp();
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

StateSpace minimal_realization(const StateSpace& sys, double tol) {
    sys.validate();
    const Index n = sys.states();
    if (n == 0) return sys;
    const Matrix Vc = controllable_basis(sys.A, sys.B, tol);
    const Matrix Ac = Vc.transpose() * sys.A * Vc;
    const Matrix Bc = Vc.transpose() * sys.B;
    const Matrix Cc = sys.C * Vc;
    const Matrix Vo = controllable_basis(Ac.transpose(), Cc.transpose(), tol);
    return StateSpace(Vo.transpose() * Ac * Vo, Vo.transpose() * Bc, Cc * Vo, sys.D);
}

}  // namespace mocc
