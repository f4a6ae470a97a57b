#pragma once

// Data-parallel inner loops shared by the Morlet transform, the LSTM and the
// Gram/scatter products of LDA and PCA. Each kernel has a scalar reference and
// vectorized variants; the active backend is picked once at startup from CPU
// features and can be pinned with HANDOVER_SIMD=scalar|avx2|neon or set_backend().
//
// Vector backends reassociate sums, so results differ from the scalar reference by
// rounding only. A given backend is deterministic: same inputs, same bits.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

namespace handover::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view name(Backend b);
bool supported(Backend b);
Backend active_backend();
/// Throws SpecError when the backend is not available on this CPU/build.
void set_backend(Backend b);
Backend best_backend();

/// sum_i a[i] * b[i]
double dot(std::span<const double> a, std::span<const double> b);
/// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// (sum_i x[i] * re[i], sum_i x[i] * im[i]): one pass of a real signal against a complex kernel.
std::pair<double, double> dot2(std::span<const double> x, std::span<const double> re,
                               std::span<const double> im);

/// y[r] += sum_c w[r * cols + c] * x[c] for a row-major [rows x cols] matrix.
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);
/// y[c] += sum_r w[r * cols + c] * x[r]  (transposed product, row-major storage).
void gemv_t(std::span<const double> w, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);
/// w[r * cols + c] += x[r] * v[c]  (rank-1 update).
void ger(std::span<const double> x, std::span<const double> v, std::span<double> w);

// Direct entry points per backend, for equivalence tests and benchmarks.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void dot2(const double* x, const double* re, const double* im, std::size_t n, double* out_re,
          double* out_im);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void dot2(const double* x, const double* re, const double* im, std::size_t n, double* out_re,
          double* out_im);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void dot2(const double* x, const double* re, const double* im, std::size_t n, double* out_re,
          double* out_im);
}  // namespace neon

}  // namespace handover::simd
