#include "handover/simd/kernels.hpp"

namespace handover::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void dot2(const double* x, const double* re, const double* im, std::size_t n, double* out_re,
          double* out_im) {
  double sr = 0.0;
  double si = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sr += x[i] * re[i];
    si += x[i] * im[i];
  }
  *out_re = sr;
  *out_im = si;
}

}  // namespace handover::simd::scalar
