#include <cmath>

#include "kernel_impl.hpp"

namespace stagewise::kernels {
namespace {

// Reference reductions: eight running partial sums over blocks of eight,
// folded as (s0+s4, s1+s5, s2+s6, s3+s7) then ((t0+t1)+(t2+t3)), then the
// tail added in index order. The vector kernels reproduce this exactly.
inline double fold8(const double s[8]) {
  const double t0 = s[0] + s[4];
  const double t1 = s[1] + s[5];
  const double t2 = s[2] + s[6];
  const double t3 = s[3] + s[7];
  return (t0 + t1) + (t2 + t3);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) {
      const double prod = a[i + j] * b[i + j];
      s[j] = s[j] + prod;
    }
  }
  double acc = fold8(s);
  for (; i < n; ++i) {
    const double prod = a[i] * b[i];
    acc = acc + prod;
  }
  return acc;
}

double sum_abs_scalar(const double* x, std::size_t n) {
  double s[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) s[j] = s[j] + std::fabs(x[i + j]);
  }
  double acc = fold8(s);
  for (; i < n; ++i) acc = acc + std::fabs(x[i]);
  return acc;
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) m = a;
  }
  return m;
}

std::size_t argmax_abs_scalar(const double* x, std::size_t n) {
  std::size_t best = 0;
  double m = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m) {
      m = a;
      best = i;
    }
  }
  return best;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = a * x[i];
    y[i] = y[i] + prod;
  }
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = a * x[i];
}

void sign_step_scalar(double eps, const double* d, double* u, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0.0) {
      u[i] = u[i] - eps;
    } else if (d[i] < 0.0) {
      u[i] = u[i] + eps;
    }
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{Backend::Scalar, "scalar",    dot_scalar,   sum_abs_scalar,
                             max_abs_scalar,  argmax_abs_scalar, axpy_scalar, scale_scalar,
                             sign_step_scalar};
  return t;
}

}  // namespace stagewise::kernels
