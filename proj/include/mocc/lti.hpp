#pragma once

// Continuous-time LTI value types and the primitive computations the rest of
// the library is built from.

#include <optional>
#include <string>
#include <vector>

#include "mocc/types.hpp"

namespace mocc {

/// Realization [A B; C D] := C (sI - A)^{-1} B + D.
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;

    StateSpace() = default;
    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d);

    /// Static gain (no states).
    static StateSpace gain(const Matrix& d);
    static StateSpace zero(Index outputs, Index inputs);

    Index states() const { return A.rows(); }
    Index inputs() const { return B.cols(); }
    Index outputs() const { return C.rows(); }

    /// Throws DimensionError / NumericalError when the invariants fail.
    void validate() const;
};

/// Generalized plant
///   x' = A x + B1 w + B2 u
///   z  = C1 (C2 x - r) + D12 u
///   y  = C2 x + D21 w
struct PlantModel {
    Matrix A;
    Matrix B1;
    Matrix B2;
    Matrix C1;   // p1 x p2, weights the tracking error C2 x - r
    Matrix C2;   // p2 x n
    Matrix D12;  // p1 x m2
    Matrix D21;  // p2 x m1

    Index n() const { return A.rows(); }
    Index m1() const { return B1.cols(); }
    Index m2() const { return B2.cols(); }
    Index p1() const { return C1.rows(); }
    Index p2() const { return C2.rows(); }

    Matrix R1() const { return D12.transpose() * D12; }
    Matrix R2() const { return D21 * D21.transpose(); }
    /// Performance map on the state, C1 * C2.
    Matrix Cz() const { return C1 * C2; }

    void validate() const;
};

/// The double integrator used throughout the worked example.
PlantModel double_integrator_example();

/// Strictly increasing list of angular frequencies (rad/s).
class FrequencyGrid {
public:
    FrequencyGrid() = default;
    explicit FrequencyGrid(std::vector<double> omegas);

    static FrequencyGrid logspace(double lo_exp10, double hi_exp10, std::size_t points);

    const std::vector<double>& values() const { return omegas_; }
    std::size_t size() const { return omegas_.size(); }
    double operator[](std::size_t i) const { return omegas_[i]; }
    auto begin() const { return omegas_.begin(); }
    auto end() const { return omegas_.end(); }

private:
    std::vector<double> omegas_;
};

/// Eigenvalues sorted by (real part, imaginary part).
CVector sorted_eigenvalues(const Matrix& M);

/// max Re(lambda(M)); NumericalError on non-finite input.
double spectral_abscissa(const Matrix& M);

/// spectral_abscissa(M) < -kStabilityMargin.
bool is_stable(const Matrix& M);

struct StabilizabilityReport {
    bool stabilizable = false;
    bool detectable = false;
};

/// PBH rank tests on the closed right half plane.
StabilizabilityReport check_stabilizable_detectable(const PlantModel& plant);

/// Invariant zeros of (A, B, C, D): finite generalized eigenvalues of the
/// Rosenbrock pencil. Tall (full column rank D) and wide (full row rank D)
/// pencils are reduced to a square eigenproblem first.
CVector invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D);

struct AssumptionItem {
    bool passed = false;
    std::string detail;
};

struct StandardAssumptionsReport {
    AssumptionItem measurement_rank;  // [A - jw, B1; C2, D21] full row rank
    AssumptionItem control_rank;      // [A - jw, B2; C1 C2, D12] full column rank
    AssumptionItem weights_positive;  // R1 > 0, R2 > 0
    bool all_passed() const {
        return measurement_rank.passed && control_rank.passed && weights_positive.passed;
    }
};

StandardAssumptionsReport check_standard_assumptions(const PlantModel& plant);

/// Largest singular value (0 for empty matrices).
double sigma_max(const CMatrix& M);

/// C (jw I - A)^{-1} B + D. NumericalError if jw is (numerically) a pole.
CMatrix frequency_response(const StateSpace& sys, double omega);

/// Feedback of G with K around the loop, u_G = v + sign * y_K, u_K = y_G.
/// Inputs: v (G's input), outputs: y_G. Negative feedback is sign = -1.
StateSpace interconnect_feedback(const StateSpace& G, const StateSpace& K, int sign);

/// Series connection: output of first feeds input of second.
StateSpace series(const StateSpace& first, const StateSpace& second);

/// State coordinates z = T x.
StateSpace similarity_transform(const StateSpace& sys, const Matrix& T);

struct DiscretePropagator {
    Matrix Ad;
    Matrix Bd;
};

/// Zero-order-hold discretization through the augmented exponential
/// exp([A B; 0 0] h).
DiscretePropagator exact_discretize(const StateSpace& sys, double h);

/// Removes uncontrollable then unobservable states with orthogonal
/// Krylov (staircase-style) projections. Rank decisions use tol relative to
/// the norm of the data.
StateSpace minimal_realization(const StateSpace& sys, double tol = 1e-9);

}  // namespace mocc
