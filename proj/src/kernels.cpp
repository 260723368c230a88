#include "mocc/kernels.hpp"

#include <atomic>

namespace mocc::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(MOCC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

// -1: follow detection, otherwise the pinned Isa value.
std::atomic<int> g_pinned{-1};

}  // namespace

const char* to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa detected_isa() {
    static const Isa isa = cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
    return isa;
}

Isa active_isa() {
    const int p = g_pinned.load(std::memory_order_relaxed);
    if (p < 0) return detected_isa();
    const Isa want = static_cast<Isa>(p);
    return want == Isa::avx2 && detected_isa() != Isa::avx2 ? Isa::scalar : want;
}

void pin_isa(Isa isa) { g_pinned.store(static_cast<int>(isa), std::memory_order_relaxed); }
void unpin_isa() { g_pinned.store(-1, std::memory_order_relaxed); }

void gemv(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y) {
#if defined(MOCC_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::gemv(A, rows, cols, x, y);
#endif
    scalar::gemv(A, rows, cols, x, y);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(MOCC_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::axpy(alpha, x, y, n);
#endif
    scalar::axpy(alpha, x, y, n);
}

double sum_squares(const double* x, std::size_t n) {
#if defined(MOCC_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return avx2::sum_squares(x, n);
#endif
    return scalar::sum_squares(x, n);
}

}  // namespace mocc::kernels
