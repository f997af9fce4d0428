#pragma once

// Data-parallel inner loops used by the losses, oracles and solvers.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, a vector implementation (AVX2 on x86-64, NEON on AArch64).
// Reductions use a fixed blocking of eight partial sums combined in a fixed
// order, and the vector code performs exactly the same additions in the same
// order without fused multiply-add. The two implementations therefore agree
// bit for bit, which keeps paths reproducible across machines.

#include <cstddef>
#include <span>

#include "stagewise/types.hpp"

namespace stagewise::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_abs)(const double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // Smallest index attaining max |x_i|; 0 when n == 0.
  std::size_t (*argmax_abs)(const double* x, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // x *= a
  void (*scale)(double a, double* x, std::size_t n);
  // u_i -= eps * sign(d_i), sign(0) = 0
  void (*sign_step)(double eps, const double* d, double* u, std::size_t n);
};

const KernelTable& scalar_table();
bool available(Backend backend);
const KernelTable& table(Backend backend);

/// Best backend supported by the running CPU, unless the environment variable
/// STAGEWISE_KERNELS names another one ("scalar", "avx2", "neon").
Backend detect();
const KernelTable& active();
void select(Backend backend);
const char* name(Backend backend);

// Convenience wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
double sum_abs(std::span<const double> x);
double max_abs(std::span<const double> x);
std::size_t argmax_abs(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(double a, std::span<double> x);
void sign_step(double eps, std::span<const double> d, std::span<double> u);

/// out = X * beta, accumulated column by column (X is column-major).
void gemv(const Matrix& X, std::span<const double> beta, std::span<double> out);
/// out_j = <X_j, r> for every column j.
void gemv_t(const Matrix& X, std::span<const double> r, std::span<double> out);

}  // namespace stagewise::kernels
