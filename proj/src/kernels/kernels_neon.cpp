// NEON kernels for aarch64, where Advanced SIMD is part of the baseline ISA.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace slm::kernels::neon {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(x + i + 4), vld1q_f64(y + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(x + i + 6), vld1q_f64(y + i + 6));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
  double acc = vaddvq_f64(vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3)));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void gemv(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = dot(a + i * cols, x, cols);
}

void gemv_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  std::size_t i = 0;
  for (; i + 2 <= rows; i += 2) {
    const double* r0 = a + i * cols;
    const double* r1 = r0 + cols;
    const float64x2_t c0 = vdupq_n_f64(x[i]);
    const float64x2_t c1 = vdupq_n_f64(x[i + 1]);
    std::size_t j = 0;
    for (; j + 2 <= cols; j += 2) {
      float64x2_t acc = vld1q_f64(y + j);
      acc = vfmaq_f64(acc, c0, vld1q_f64(r0 + j));
      acc = vfmaq_f64(acc, c1, vld1q_f64(r1 + j));
      vst1q_f64(y + j, acc);
    }
    for (; j < cols; ++j) y[j] += x[i] * r0[j] + x[i + 1] * r1[j];
  }
  for (; i < rows; ++i) axpy(x[i], a + i * cols, y, cols);
}

}  // namespace slm::kernels::neon
