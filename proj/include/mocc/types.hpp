#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mocc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Base of every error raised by the library. Callers that only care about
// "something in the control pipeline failed" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A stability precondition failed (unstable observer, unstable Aq, ...).
class StabilityError : public Error {
public:
    using Error::Error;
};

// Numerical breakdown: singular solve, non-finite values, ill-conditioning.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Riccati equation has no stabilizing solution.
class NoStabilizingSolution : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Threshold below which a spectral abscissa counts as stable.
inline constexpr double kStabilityMargin = 1e-9;

}  // namespace mocc
