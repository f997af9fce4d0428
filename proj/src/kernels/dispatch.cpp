#include <atomic>
#include <cstdlib>
#include <string_view>

#include "kernel_impl.hpp"

namespace stagewise::kernels {
namespace {

std::atomic<const KernelTable*> g_active{nullptr};

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InputError(std::string(what) + ": length mismatch");
}

}  // namespace

bool available(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return detail::avx2_supported();
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Backend backend) {
  if (!available(backend)) {
    throw UnsupportedError(std::string("kernel backend not available: ") + name(backend));
  }
  switch (backend) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return detail::avx2_table();
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return detail::neon_table();
#endif
    default:
      return scalar_table();
  }
}

const char* name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

Backend detect() {
  if (const char* env = std::getenv("STAGEWISE_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && available(Backend::Avx2)) return Backend::Avx2;
    if (v == "neon" && available(Backend::Neon)) return Backend::Neon;
  }
  if (available(Backend::Avx2)) return Backend::Avx2;
  if (available(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

const KernelTable& active() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t == nullptr) {
    t = &table(detect());
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void select(Backend backend) { g_active.store(&table(backend), std::memory_order_release); }

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

double sum_abs(std::span<const double> x) { return active().sum_abs(x.data(), x.size()); }

double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

std::size_t argmax_abs(std::span<const double> x) {
  return active().argmax_abs(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size(), "axpy");
  active().axpy(a, x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> x) { active().scale(a, x.data(), x.size()); }

void sign_step(double eps, std::span<const double> d, std::span<double> u) {
  check_sizes(d.size(), u.size(), "sign_step");
  active().sign_step(eps, d.data(), u.data(), d.size());
}

void gemv(const Matrix& X, std::span<const double> beta, std::span<double> out) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  check_sizes(beta.size(), p, "gemv");
  check_sizes(out.size(), n, "gemv");
  const KernelTable& k = active();
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (beta[j] != 0.0) k.axpy(beta[j], X.data() + j * n, out.data(), n);
  }
}

void gemv_t(const Matrix& X, std::span<const double> r, std::span<double> out) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  check_sizes(r.size(), n, "gemv_t");
  check_sizes(out.size(), p, "gemv_t");
  const KernelTable& k = active();
  for (std::size_t j = 0; j < p; ++j) out[j] = k.dot(X.data() + j * n, r.data(), n);
}

}  // namespace stagewise::kernels
