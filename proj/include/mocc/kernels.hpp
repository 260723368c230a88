#pragma once

// Hot loops of the simulator. Each kernel has a scalar reference version and
// an AVX2 version; the dispatcher picks one at runtime.

#include <cstddef>

namespace mocc::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();
/// ISA used by the dispatching entry points. Defaults to detected_isa();
/// can be pinned (e.g. for equivalence tests). Pinning avx2 on a machine
/// without it is ignored.
Isa active_isa();
void pin_isa(Isa isa);
void unpin_isa();

/// y = A x with A column-major rows x cols (leading dimension = rows).
void gemv(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
/// sum x_i^2
double sum_squares(const double* x, std::size_t n);

namespace scalar {
void gemv(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace scalar

#if defined(MOCC_HAVE_AVX2)
namespace avx2 {
void gemv(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace mocc::kernels
