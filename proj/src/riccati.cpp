#include "mocc/riccati.hpp"

#include <cmath>
#include <vector>

#include <lapacke.h>

#include "mocc/lti.hpp"

namespace mocc {

namespace {

lapack_logical select_open_left_half(const double* re, const double* /*im*/) { return *re < 0.0; }

Matrix symmetrize(const Matrix& X) { return 0.5 * (X + X.transpose()); }

}  // namespace

void CareProblem::validate() const {
    const Index n = A.rows(), m = B.cols();
    if (A.cols() != n || B.rows() != n) throw DimensionError("CareProblem: A must be n x n and B n x m");
    if (Q.rows() != n || Q.cols() != n) throw DimensionError("CareProblem: Q must be n x n");
    if (R.rows() != m || R.cols() != m) throw DimensionError("CareProblem: R must be m x m");
    if (S.size() != 0 && (S.rows() != n || S.cols() != m)) throw DimensionError("CareProblem: S must be n x m");
    if ((Q - Q.transpose()).norm() > 1e-10 * std::max(1.0, Q.norm())) {
        throw Error("CareProblem: Q must be symmetric");
    }
    if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm())) {
        throw Error("CareProblem: R must be symmetric");
    }
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) throw Error("CareProblem: R must be positive definite");
}

OrderedSchur ordered_real_schur(const Matrix& H, double axis_tol) {
    const Index n = H.rows();
    if (H.cols() != n) throw DimensionError("ordered_real_schur: matrix must be square");
    if (!H.allFinite()) throw NumericalError("ordered_real_schur: non-finite input");
    OrderedSchur out;
    out.T = H;
    out.Z = Matrix(n, n);
    if (n == 0) return out;
    std::vector<double> wr(static_cast<std::size_t>(n)), wi(static_cast<std::size_t>(n));
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select_open_left_half, static_cast<lapack_int>(n),
                      out.T.data(), static_cast<lapack_int>(n), &sdim, wr.data(), wi.data(),
                      out.Z.data(), static_cast<lapack_int>(n));
    if (info != 0) {
        throw NumericalError("ordered_real_schur: dgees failed (info = " + std::to_string(info) + ")");
    }
    out.stable_count = sdim;
    for (Index i = 0; i < n; ++i) {
        const double mag = std::hypot(wr[static_cast<std::size_t>(i)], wi[static_cast<std::size_t>(i)]);
        if (std::abs(wr[static_cast<std::size_t>(i)]) <= axis_tol * std::max(1.0, mag)) ++out.near_axis_count;
    }
    return out;
}

Matrix riccati_residual(const Matrix& A, const Matrix& G, const Matrix& Q, const Matrix& X) {
    return A.transpose() * X + X * A - X * G * X + Q;
}

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    const Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n) throw DimensionError("solve_lyapunov: dimensions");
    const Matrix I = Matrix::Identity(n, n);
    Matrix K = Matrix::Zero(n * n, n * n);
    const Matrix At = A.transpose();
    for (Index j = 0; j < n; ++j) {
        // column block j of vec(A'X + XA)
        K.block(j * n, j * n, n, n) += At;
        for (Index k = 0; k < n; ++k) K.block(j * n, k * n, n, n) += A(k, j) * I;
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) throw NumericalError("solve_lyapunov: singular Lyapunov operator");
    const Vector q = Eigen::Map<const Vector>(Q.data(), n * n);
    const Vector x = lu.solve(-q);
    return Eigen::Map<const Matrix>(x.data(), n, n);
}

Matrix solve_hamiltonian_riccati(const Matrix& A, const Matrix& G, const Matrix& Q,
                                 const RiccatiOptions& opts) {
    const Index n = A.rows();
    if (A.cols() != n || G.rows() != n || G.cols() != n || Q.rows() != n || Q.cols() != n) {
        throw DimensionError("solve_hamiltonian_riccati: A, G, Q must be n x n");
    }
    if (n == 0) return Matrix(0, 0);
    Matrix H(2 * n, 2 * n);
    H << A, -G, -Q, -A.transpose();
    const OrderedSchur schur = ordered_real_schur(H, 1e-10);
    if (schur.near_axis_count > 0 || schur.stable_count != n) {
        throw NoStabilizingSolution("Riccati: Hamiltonian has eigenvalues on the imaginary axis");
    }
    const Matrix X1 = schur.Z.topLeftCorner(n, n);
    const Matrix X2 = schur.Z.bottomLeftCorner(n, n);
    Eigen::JacobiSVD<Matrix> svd(X1);
    const auto& sv = svd.singularValues();
    const double cond = sv(n - 1) > 0.0 ? sv(0) / sv(n - 1) : INFINITY;
    if (!(cond < opts.max_condition)) {
        throw NoStabilizingSolution("Riccati: stable subspace basis is ill-conditioned (cond = " +
                                    std::to_string(cond) + ")");
    }
    // X = X2 X1^{-1}  <=>  X1' X' = X2'
    Matrix X = symmetrize(X1.transpose().fullPivLu().solve(X2.transpose()).transpose());

    if (opts.defect_correction) {
        const Matrix res = riccati_residual(A, G, Q, X);
        if (res.norm() > opts.residual_tol * (1.0 + X.norm())) {
            const Matrix Acl = A - G * X;
            X = symmetrize(X + solve_lyapunov(Acl, res));
        }
    }
    if (!X.allFinite()) throw NumericalError("Riccati: non-finite solution");
    if (!is_stable(A - G * X)) throw NoStabilizingSolution("Riccati: solution is not stabilizing");
    return X;
}

Matrix solve_care(const CareProblem& p, const RiccatiOptions& opts) {
    p.validate();
    const Index n = p.A.rows(), m = p.B.cols();
    const Matrix S = p.S.size() == 0 ? Matrix::Zero(n, m) : p.S;
    Eigen::LLT<Matrix> llt(p.R);
    const Matrix RiSt = llt.solve(S.transpose());
    const Matrix RiBt = llt.solve(p.B.transpose());
    const Matrix At = p.A - p.B * RiSt;
    const Matrix G = symmetrize(p.B * RiBt);
    const Matrix Qt = symmetrize(p.Q - S * RiSt);
    return solve_hamiltonian_riccati(At, G, Qt, opts);
}

double care_residual(const CareProblem& p, const Matrix& X) {
    const Index n = p.A.rows(), m = p.B.cols();
    const Matrix S = p.S.size() == 0 ? Matrix::Zero(n, m) : p.S;
    const Matrix XBS = X * p.B + S;
    const Matrix res = p.A.transpose() * X + X * p.A - XBS * p.R.llt().solve(XBS.transpose()) + p.Q;
    return res.norm();
}

}  // namespace mocc
