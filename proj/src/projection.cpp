#include "stagewise/projection.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace stagewise {

Vector project_l1_ball(const Vector& v, double t) {
  if (!(t >= 0.0)) throw InputError("l1 projection: negative radius");
  if (v.cwiseAbs().sum() <= t) return v;
  if (t == 0.0) return Vector::Zero(v.size());
  std::vector<double> u(static_cast<std::size_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) u[static_cast<std::size_t>(i)] = std::fabs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double th = (cum - t) / static_cast<double>(j + 1);
    if (u[j] - th > 0.0) theta = th;
  }
  Vector w(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::max(std::fabs(v(i)) - theta, 0.0);
    w(i) = v(i) < 0 ? -a : a;
  }
  // guard against rounding pushing the result just outside the ball
  const double s = w.cwiseAbs().sum();
  if (s > t) w *= t / s;
  return w;
}

Vector block_prox(const Vector& v, double c, GroupNorm norm) {
  if (c <= 0.0) return v;
  switch (norm) {
    case GroupNorm::L2: {
      const double n = v.norm();
      if (n <= c) return Vector::Zero(v.size());
      return (1.0 - c / n) * v;
    }
    case GroupNorm::L1: {
      Vector w(v.size());
      for (Index i = 0; i < v.size(); ++i) {
        const double a = std::max(std::fabs(v(i)) - c, 0.0);
        w(i) = v(i) < 0 ? -a : a;
      }
      return w;
    }
    case GroupNorm::Linf:
      // Moreau: prox of c||.||_inf is v minus the projection onto the l1 ball of radius c
      return v - project_l1_ball(v, c);
  }
  return v;
}

namespace {

Vector group_prox(const GroupRegularizer& reg, const Vector& x, double theta) {
  const auto& part = reg.partition();
  Vector out(x.size());
  for (Index j = 0; j < part.count(); ++j) {
    const auto& idx = part.groups[static_cast<std::size_t>(j)];
    Vector b(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) b(static_cast<Index>(k)) = x(idx[k]);
    const Vector r = block_prox(b, theta * part.weights[static_cast<std::size_t>(j)],
                                part.norms[static_cast<std::size_t>(j)]);
    for (std::size_t k = 0; k < idx.size(); ++k) out(idx[k]) = r(static_cast<Index>(k));
  }
  return out;
}

Vector project_group(const GroupRegularizer& reg, const Vector& x, double t) {
  if (reg.value(x) <= t) return x;
  // zero-weight groups are unconstrained; prox leaves them untouched
  double lo = 0.0, hi = reg.dual_value(x);
  if (!std::isfinite(hi)) {
    hi = 0.0;
    const auto& part = reg.partition();
    for (Index j = 0; j < part.count(); ++j) {
      const double w = part.weights[static_cast<std::size_t>(j)];
      if (w > 0) hi = std::max(hi, reg.block_dual(j, x) / w);
    }
  }
  Vector best = group_prox(reg, x, hi);
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    Vector cand = group_prox(reg, x, mid);
    if (reg.value(cand) <= t) {
      hi = mid;
      best = std::move(cand);
    } else {
      lo = mid;
    }
  }
  return best;
}

Vector project_trace(const TraceRegularizer& reg, const Vector& x, double t) {
  const Matrix A = reg.as_matrix(x);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (s.sum() <= t) return x;
  const Vector sp = project_l1_ball(s, t);
  const Matrix B = svd.matrixU() * sp.asDiagonal() * svd.matrixV().transpose();
  return Eigen::Map<const Vector>(B.data(), B.size());
}

}  // namespace

Vector project_ball(const Regularizer& reg, const Vector& x, double t) {
  if (x.size() != reg.dim()) throw InputError("projection: length mismatch");
  if (!(t >= 0.0)) throw InputError("projection: negative radius");
  switch (reg.kind()) {
    case RegKind::L1: return project_l1_ball(x, t);
    case RegKind::Group: return project_group(static_cast<const GroupRegularizer&>(reg), x, t);
    case RegKind::Trace: return project_trace(static_cast<const TraceRegularizer&>(reg), x, t);
    case RegKind::Quadratic: break;
  }
  throw UnsupportedError("projection onto " + reg.describe() + " balls is not implemented");
}

}  // namespace stagewise
