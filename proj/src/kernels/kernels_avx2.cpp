// Compiled with -mavx2 (no -mfma). Only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "kernel_impl.hpp"

namespace stagewise::kernels::detail {
namespace {

inline __m256d abs_pd(__m256d v) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign_mask, v);
}

// Matches the scalar fold: lanes (s0..s3) live in lo, (s4..s7) in hi.
inline double fold(__m256d lo, __m256d hi) {
  const __m256d t = _mm256_add_pd(lo, hi);
  alignas(32) double lane[4];
  _mm256_store_pd(lane, t);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    lo = _mm256_add_pd(lo, p0);
    hi = _mm256_add_pd(hi, p1);
  }
  double acc = fold(lo, hi);
  for (; i < n; ++i) {
    const double prod = a[i] * b[i];
    acc = acc + prod;
  }
  return acc;
}

double sum_abs_avx2(const double* x, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    lo = _mm256_add_pd(lo, abs_pd(_mm256_loadu_pd(x + i)));
    hi = _mm256_add_pd(hi, abs_pd(_mm256_loadu_pd(x + i + 4)));
  }
  double acc = fold(lo, hi);
  for (; i < n; ++i) acc = acc + std::fabs(x[i]);
  return acc;
}

double max_abs_avx2(const double* x, std::size_t n) {
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, abs_pd(_mm256_loadu_pd(x + i)));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = lane[0];
  for (int j = 1; j < 4; ++j) r = lane[j] > r ? lane[j] : r;
  for (; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > r) r = a;
  }
  return r;
}

std::size_t argmax_abs_avx2(const double* x, std::size_t n) {
  if (n == 0) return 0;
  const double m = max_abs_avx2(x, n);
  const __m256d target = _mm256_set1_pd(m);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d eq = _mm256_cmp_pd(abs_pd(_mm256_loadu_pd(x + i)), target, _CMP_EQ_OQ);
    const int mask = _mm256_movemask_pd(eq);
    if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) {
    if (std::fabs(x[i]) == m) return i;
  }
  return 0;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

void sign_step_avx2(double eps, const double* d, double* u, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vd = _mm256_loadu_pd(d + i);
    const __m256d pos = _mm256_and_pd(_mm256_cmp_pd(vd, zero, _CMP_GT_OQ), one);
    const __m256d neg = _mm256_and_pd(_mm256_cmp_pd(vd, zero, _CMP_LT_OQ), one);
    const __m256d sgn = _mm256_sub_pd(pos, neg);
    const __m256d vu = _mm256_loadu_pd(u + i);
    _mm256_storeu_pd(u + i, _mm256_sub_pd(vu, _mm256_mul_pd(veps, sgn)));
  }
  for (; i < n; ++i) {
    if (d[i] > 0.0) {
      u[i] = u[i] - eps;
    } else if (d[i] < 0.0) {
      u[i] = u[i] + eps;
    }
  }
}

}  // namespace

bool avx2_supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}

const KernelTable& avx2_table() {
  static const KernelTable t{Backend::Avx2, "avx2",          dot_avx2,  sum_abs_avx2,
                             max_abs_avx2,  argmax_abs_avx2, axpy_avx2, scale_avx2,
                             sign_step_avx2};
  return t;
}

}  // namespace stagewise::kernels::detail
