#include "stagewise/frankwolfe.hpp"

#include <algorithm>
#include <cmath>

namespace stagewise {

bool feasible(const Regularizer& reg, const Vector& x, double t) {
  return reg.value(x) <= t + 1e-9 * std::max(1.0, t);
}

Vector constrained_lmo(const Regularizer& reg, const Vector& grad, double t) {
  if (!(t >= 0.0)) throw InputError("constraint level must be nonnegative");
  if (t == 0.0) return Vector::Zero(reg.dim());
  return reg.lmo(grad, t);
}

double duality_gap(const Vector& x, double t, const Loss& loss, const Regularizer& reg) {
  if (!feasible(reg, x, t)) {
    throw InputError("duality gap: point is infeasible (g(x) = " + std::to_string(reg.value(x)) +
                     " > t = " + std::to_string(t) + ")");
  }
  const Vector grad = loss.gradient(x);
  if (reg.is_norm()) return grad.dot(x) + t * reg.dual_value(grad);
  return grad.dot(x - constrained_lmo(reg, grad, t));
}

CertifiedSolution run_fw(const Loss& loss, const Regularizer& reg, const FWConfig& cfg,
                         const std::optional<Vector>& x0) {
  if (!(cfg.gap_tol > 0.0)) throw InputError("gap_tol must be positive");
  if (!(cfg.t >= 0.0)) throw InputError("t must be nonnegative");
  Vector x = x0 ? *x0 : Vector::Zero(reg.dim());
  if (!feasible(reg, x, cfg.t)) throw InputError("run_fw: starting point is infeasible");

  CertifiedSolution best;
  best.t = cfg.t;
  best.gap = INFINITY;
  Vector grad;
  for (Index k = 1;; ++k) {
    const double f = loss.value_grad(x, grad);
    const Vector s = constrained_lmo(reg, grad, cfg.t);
    const double gap = grad.dot(x - s);
    if (gap < best.gap) {
      best.x = x;
      best.gap = gap;
      best.f = f;
    }
    best.iterations = k - 1;
    if (gap <= cfg.gap_tol) {
      best.converged = true;
      return best;
    }
    if (k > cfg.max_iter) return best;
    const double gamma = 2.0 / (static_cast<double>(k) + 1.0);
    x = (1.0 - gamma) * x + gamma * s;
  }
}

FWPath fw_path_follow(const Loss& loss, const Regularizer& reg, double gamma, double m, double t0,
                      double t_max, Index max_iter) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  if (!(m > 1.0)) throw InputError("m must exceed 1");
  if (!(t0 >= 0.0) || !(t_max >= t0)) throw InputError("need 0 <= t0 <= t_max");
  FWPath out;
  out.gamma = gamma;
  out.m = m;
  FWConfig cfg{t0, gamma / m, max_iter};
  CertifiedSolution cur = run_fw(loss, reg, cfg);
  for (;;) {
    out.all_converged = out.all_converged && cur.converged;
    out.breakpoints.push_back(cur);
    const double lambda = reg.dual_value(loss.gradient(cur.x));
    if (lambda == 0.0) {
      out.reached_optimum = true;
      out.covered_to = INFINITY;
      return out;
    }
    const double t_next = cur.t + (1.0 - 1.0 / m) * gamma / lambda;
    out.covered_to = t_next;
    if (t_next >= t_max) return out;
    cfg.t = t_next;
    cur = run_fw(loss, reg, cfg, cur.x);
  }
}

const CertifiedSolution& fw_path_at(const FWPath& path, double t) {
  if (path.breakpoints.empty() || t < path.breakpoints.front().t || t > path.covered_to) {
    throw RangeError("t outside the certified path");
  }
  const CertifiedSolution* best = &path.breakpoints.front();
  for (const auto& b : path.breakpoints) {
    if (b.t <= t) best = &b;
  }
  return *best;
}

Vector one_step_fw(const Loss& loss, const Regularizer& reg, const Vector& x_prev, double t_next) {
  if (!feasible(reg, x_prev, t_next)) throw InputError("one_step_fw: previous point infeasible at t_next");
  return constrained_lmo(reg, loss.gradient(x_prev), t_next);
}

}  // namespace stagewise
