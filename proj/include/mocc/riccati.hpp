#pragma once

#include "mocc/types.hpp"

namespace mocc {

/// A'X + XA - (XB + S) R^{-1} (XB + S)' + Q = 0
struct CareProblem {
    Matrix A;
    Matrix B;
    Matrix Q;
    Matrix R;
    Matrix S;  // n x m cross term; may be left empty for zero

    void validate() const;
};

struct RiccatiOptions {
    // Extra defect-correction step when the residual exceeds residual_tol.
    bool defect_correction = true;
    double residual_tol = 1e-8;
    // Basis [X1; X2] of the stable subspace is rejected when cond(X1) exceeds this.
    double max_condition = 1e12;
};

/// Stabilizing solution of A'X + XA - X G X + Q = 0 (G, Q symmetric, G may be
/// indefinite) from the ordered real Schur form of [A -G; -Q -A'].
/// Throws NoStabilizingSolution if the Hamiltonian has imaginary-axis
/// eigenvalues or the stable subspace is not a graph subspace.
Matrix solve_hamiltonian_riccati(const Matrix& A, const Matrix& G, const Matrix& Q,
                                 const RiccatiOptions& opts = {});

Matrix solve_care(const CareProblem& p, const RiccatiOptions& opts = {});

/// Frobenius norm of the CARE residual at X.
double care_residual(const CareProblem& p, const Matrix& X);

/// A'X + XA - XGX + Q.
Matrix riccati_residual(const Matrix& A, const Matrix& G, const Matrix& Q, const Matrix& X);

/// Solves A'X + XA + Q = 0 by a Kronecker-product linear solve (n <= ~30).
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

/// Real Schur form with the eigenvalues of negative real part ordered first.
struct OrderedSchur {
    Matrix T;
    Matrix Z;
    Index stable_count = 0;
    Index near_axis_count = 0;  // eigenvalues with |Re| below the axis tolerance
};

OrderedSchur ordered_real_schur(const Matrix& H, double axis_tol);

}  // namespace mocc
