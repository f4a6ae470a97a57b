// AArch64 only; the dispatcher never selects it elsewhere.
#include "handover/simd/kernels.hpp"

#include <arm_neon.h>

namespace handover::simd::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void dot2(const double* x, const double* re, const double* im, std::size_t n, double* out_re,
          double* out_im) {
  float64x2_t ar = vdupq_n_f64(0.0);
  float64x2_t ai = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t vx = vld1q_f64(x + i);
    ar = vfmaq_f64(ar, vx, vld1q_f64(re + i));
    ai = vfmaq_f64(ai, vx, vld1q_f64(im + i));
  }
  double sr = vaddvq_f64(ar);
  double si = vaddvq_f64(ai);
  for (; i < n; ++i) {
    sr += x[i] * re[i];
    si += x[i] * im[i];
  }
  *out_re = sr;
  *out_im = si;
}

}  // namespace handover::simd::neon
