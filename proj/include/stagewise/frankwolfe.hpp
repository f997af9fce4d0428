#pragma once

#include <optional>
#include <vector>

#include "stagewise/losses.hpp"
#include "stagewise/regularizers.hpp"

namespace stagewise {

struct FWConfig {
  double t = 0.0;
  double gap_tol = 1e-8;
  Index max_iter = 50000;
};

struct CertifiedSolution {
  Vector x;
  double t = 0.0;
  double gap = 0.0;
  double f = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Feasibility tolerance used throughout: g(x) <= t + 1e-9 * max(1, t).
bool feasible(const Regularizer& reg, const Vector& x, double t);

/// argmin of <grad, z> over g(z) <= t.
Vector constrained_lmo(const Regularizer& reg, const Vector& grad, double t);

/// h_t(x) = <grad f(x), x - s> with s = constrained_lmo(grad f(x), t), which
/// equals <grad f(x), x> + t g*(grad f(x)) for norms. Throws InputError if x
/// is infeasible.
double duality_gap(const Vector& x, double t, const Loss& loss, const Regularizer& reg);

/// Frank-Wolfe with gamma_k = 2 / (k + 1). Returns the best-gap iterate; an
/// unconverged result is flagged rather than thrown.
CertifiedSolution run_fw(const Loss& loss, const Regularizer& reg, const FWConfig& cfg,
                         const std::optional<Vector>& x0 = std::nullopt);

struct FWPath {
  std::vector<CertifiedSolution> breakpoints;
  double gamma = 0.0;
  double m = 0.0;
  // Every t in [breakpoints.front().t, covered_to] is within gamma.
  double covered_to = 0.0;
  // True when g*(grad f) vanished, i.e. the unconstrained optimum was reached.
  bool reached_optimum = false;
  bool all_converged = true;
};

/// Path following: t_k = t_{k-1} + (1 - 1/m) gamma / g*(grad f(x(t_{k-1}))),
/// each breakpoint solved to gap gamma / m with warm starts.
FWPath fw_path_follow(const Loss& loss, const Regularizer& reg, double gamma, double m, double t0,
                      double t_max, Index max_iter = 50000);

/// Piecewise-constant path value at t: the breakpoint with the largest t_k <= t.
const CertifiedSolution& fw_path_at(const FWPath& path, double t);

/// One Frank-Wolfe step with gamma = 1 at t_next: the full replacement update.
Vector one_step_fw(const Loss& loss, const Regularizer& reg, const Vector& x_prev, double t_next);

}  // namespace stagewise
