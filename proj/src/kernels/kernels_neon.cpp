// AArch64 NEON variants (two doubles per register, four registers per block
// of eight so the reduction order matches the scalar reference).
#include <arm_neon.h>

#include <cmath>

#include "kernel_impl.hpp"

namespace stagewise::kernels::detail {
namespace {

inline double fold(float64x2_t s01, float64x2_t s23, float64x2_t s45, float64x2_t s67) {
  const float64x2_t t01 = vaddq_f64(s01, s45);
  const float64x2_t t23 = vaddq_f64(s23, s67);
  const double t0 = vgetq_lane_f64(t01, 0), t1 = vgetq_lane_f64(t01, 1);
  const double t2 = vgetq_lane_f64(t23, 0), t3 = vgetq_lane_f64(t23, 1);
  return (t0 + t1) + (t2 + t3);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t s01 = vdupq_n_f64(0), s23 = vdupq_n_f64(0), s45 = vdupq_n_f64(0),
              s67 = vdupq_n_f64(0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s01 = vaddq_f64(s01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    s23 = vaddq_f64(s23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
    s45 = vaddq_f64(s45, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
    s67 = vaddq_f64(s67, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
  }
  double acc = fold(s01, s23, s45, s67);
  for (; i < n; ++i) {
    const double prod = a[i] * b[i];
    acc = acc + prod;
  }
  return acc;
}

double sum_abs_neon(const double* x, std::size_t n) {
  float64x2_t s01 = vdupq_n_f64(0), s23 = vdupq_n_f64(0), s45 = vdupq_n_f64(0),
              s67 = vdupq_n_f64(0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s01 = vaddq_f64(s01, vabsq_f64(vld1q_f64(x + i)));
    s23 = vaddq_f64(s23, vabsq_f64(vld1q_f64(x + i + 2)));
    s45 = vaddq_f64(s45, vabsq_f64(vld1q_f64(x + i + 4)));
    s67 = vaddq_f64(s67, vabsq_f64(vld1q_f64(x + i + 6)));
  }
  double acc = fold(s01, s23, s45, s67);
  for (; i < n; ++i) acc = acc + std::fabs(x[i]);
  return acc;
}

double max_abs_neon(const double* x, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > r) r = a;
  }
  return r;
}

std::size_t argmax_abs_neon(const double* x, std::size_t n) {
  if (n == 0) return 0;
  const double m = max_abs_neon(x, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(x[i]) == m) return i;
  }
  return 0;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void scale_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void sign_step_neon(double eps, const double* d, double* u, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0.0) {
      u[i] = u[i] - eps;
    } else if (d[i] < 0.0) {
      u[i] = u[i] + eps;
    }
  }
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable t{Backend::Neon, "neon",          dot_neon,  sum_abs_neon,
                             max_abs_neon,  argmax_abs_neon, axpy_neon, scale_neon,
                             sign_step_neon};
  return t;
}

}  // namespace stagewise::kernels::detail
