#include "stagewise/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "stagewise/kernels.hpp"

namespace stagewise {

namespace {

bool all_finite(const Matrix& M) { return M.allFinite(); }

double clamp_eta(double eta) {
  return std::clamp(eta, -GlmLoss::kEtaClamp, GlmLoss::kEtaClamp);
}

// log(1 + exp(eta)) without overflow
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

}  // namespace

void Dataset::validate() const {
  if (X.rows() != y.size()) {
    throw InputError("dataset: X has " + std::to_string(X.rows()) + " rows but y has " +
                     std::to_string(y.size()) + " entries");
  }
  if (!all_finite(X) || !y.allFinite()) throw InputError("dataset: non-finite entries");
}

ObservedMatrix::ObservedMatrix(Index rows, Index cols, std::vector<Observation> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows < 1 || cols < 1) throw InputError("observed matrix: dimensions must be positive");
  if (entries_.empty()) throw InputError("observed matrix: no observed entries");
  std::map<Index, Observation> by_index;
  for (const auto& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw InputError("observed matrix: entry (" + std::to_string(e.row) + ", " +
                       std::to_string(e.col) + ") out of range");
    }
    if (!std::isfinite(e.value)) throw InputError("observed matrix: non-finite value");
    if (!by_index.emplace(linear(e.row, e.col), e).second) {
      throw InputError("observed matrix: duplicate entry");
    }
  }
  entries_.clear();
  for (const auto& [idx, e] : by_index) {
    entries_.push_back(e);
    support_.push_back(idx);
  }
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::LeastSquares: return "least_squares";
    case LossKind::Logistic: return "logistic";
    case LossKind::Poisson: return "poisson";
    case LossKind::MatrixCompletion: return "matrix_completion";
    case LossKind::GaussianSignal: return "gaussian_signal";
  }
  return "unknown";
}

void Loss::check_dim(const Vector& x) const {
  if (x.size() != dim()) {
    throw InputError(std::string(loss_name(kind())) + ": expected parameter of length " +
                     std::to_string(dim()) + ", got " + std::to_string(x.size()));
  }
}

Vector Loss::gradient(const Vector& x) const {
  Vector g;
  value_grad(x, g);
  return g;
}

// ---- least squares

LeastSquaresLoss::LeastSquaresLoss(Dataset data) : data_(std::move(data)) { data_.validate(); }

double LeastSquaresLoss::value(const Vector& beta) const {
  check_dim(beta);
  Vector r(data_.n());
  kernels::gemv(data_.X, view(beta), view(r));
  r = data_.y - r;
  return 0.5 * kernels::dot(view(r), view(r));
}

double LeastSquaresLoss::value_grad(const Vector& beta, Vector& grad) const {
  check_dim(beta);
  Vector r(data_.n());
  kernels::gemv(data_.X, view(beta), view(r));
  r = data_.y - r;
  grad.resize(data_.p());
  kernels::gemv_t(data_.X, view(r), view(grad));
  grad = -grad;
  return 0.5 * kernels::dot(view(r), view(r));
}

// ---- GLM

GlmLoss::GlmLoss(Dataset data, GlmFamily family) : data_(std::move(data)), family_(family) {
  data_.validate();
  for (Index i = 0; i < data_.n(); ++i) {
    const double yi = data_.y(i);
    if (family_ == GlmFamily::Logistic && yi != 0.0 && yi != 1.0) {
      throw InputError("logistic loss: response " + std::to_string(i) + " is not 0 or 1");
    }
    if (family_ == GlmFamily::Poisson && yi < 0.0) {
      throw InputError("poisson loss: response " + std::to_string(i) + " is negative");
    }
  }
}

LossKind GlmLoss::kind() const {
  return family_ == GlmFamily::Logistic ? LossKind::Logistic : LossKind::Poisson;
}

Vector GlmLoss::mean(const Vector& beta) const {
  check_dim(beta);
  Vector eta(data_.n());
  kernels::gemv(data_.X, view(beta), view(eta));
  for (Index i = 0; i < eta.size(); ++i) {
    const double e = clamp_eta(eta(i));
    eta(i) = family_ == GlmFamily::Logistic ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e);
  }
  return eta;
}

double GlmLoss::value(const Vector& beta) const {
  check_dim(beta);
  Vector eta(data_.n());
  kernels::gemv(data_.X, view(beta), view(eta));
  double v = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    if (family_ == GlmFamily::Logistic) {
      v += softplus(eta(i)) - data_.y(i) * eta(i);
    } else {
      v += std::exp(clamp_eta(eta(i))) - data_.y(i) * eta(i);
    }
  }
  return v;
}

double GlmLoss::value_grad(const Vector& beta, Vector& grad) const {
  const double v = value(beta);
  Vector r = data_.y - mean(beta);
  grad.resize(data_.p());
  kernels::gemv_t(data_.X, view(r), view(grad));
  grad = -grad;
  return v;
}

// ---- matrix completion

MatrixCompletionLoss::MatrixCompletionLoss(ObservedMatrix obs) : obs_(std::move(obs)) {}

double MatrixCompletionLoss::value(const Vector& b) const {
  check_dim(b);
  double v = 0.0;
  for (const auto& e : obs_.entries()) {
    const double d = e.value - b(obs_.linear(e.row, e.col));
    v += d * d;
  }
  return 0.5 * v;
}

double MatrixCompletionLoss::value_grad(const Vector& b, Vector& grad) const {
  check_dim(b);
  grad.setZero(dim());
  double v = 0.0;
  for (const auto& e : obs_.entries()) {
    const Index k = obs_.linear(e.row, e.col);
    const double d = b(k) - e.value;
    grad(k) = d;
    v += d * d;
  }
  return 0.5 * v;
}

// ---- Gaussian signal

GaussianSignalLoss::GaussianSignalLoss(Vector y) : y_(std::move(y)) {
  if (y_.size() < 1) throw InputError("gaussian signal loss: empty response");
  if (!y_.allFinite()) throw InputError("gaussian signal loss: non-finite response");
}

double GaussianSignalLoss::value(const Vector& beta) const {
  check_dim(beta);
  const Vector r = y_ - beta;
  return 0.5 * kernels::dot(view(r), view(r));
}

double GaussianSignalLoss::value_grad(const Vector& beta, Vector& grad) const {
  check_dim(beta);
  grad = beta - y_;
  return 0.5 * kernels::dot(view(grad), view(grad));
}

Vector GaussianSignalLoss::conjugate_gradient(const Vector& z) const {
  if (z.size() != y_.size()) throw InputError("gaussian signal conjugate: length mismatch");
  return y_ + z;
}

Vector finite_difference_gradient(const Loss& loss, const Vector& x, double h) {
  Vector g(x.size());
  Vector xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    const double orig = xp(j);
    xp(j) = orig + h;
    const double fp = loss.value(xp);
    xp(j) = orig - h;
    const double fm = loss.value(xp);
    xp(j) = orig;
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace stagewise
