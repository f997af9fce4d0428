#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stagewise/frankwolfe.hpp"
#include "stagewise/losses.hpp"
#include "stagewise/penalty.hpp"
#include "stagewise/regularizers.hpp"

namespace stagewise {

struct OracleOptions {
  double gap_tol = 1e-8;
  Index max_iter = 200000;
  bool warm_start = true;
  // gap is evaluated every `check_every` iterations
  Index check_every = 5;
};

/// Global Lipschitz constant of grad f in the Euclidean norm where one exists
/// (least squares, logistic, matrix completion, Gaussian signal).
std::optional<double> loss_lipschitz(const Loss& loss);

/// Constrained minimizer of f over g(x) <= t by accelerated projected
/// gradient with restarts, certified by the Frank-Wolfe duality gap.
CertifiedSolution solve_constrained(const Loss& loss, const Regularizer& reg, double t,
                                    const OracleOptions& opts = {},
                                    const std::optional<Vector>& x0 = std::nullopt);

struct OracleGrid {
  std::vector<double> t;
  std::vector<CertifiedSolution> solutions;
  double gap_tol = 0.0;

  bool all_converged() const;
  double worst_gap() const;
};

/// Certified solutions along an ascending t list; unconverged entries are
/// flagged, never dropped.
OracleGrid solve_grid(const Loss& loss, const Regularizer& reg, std::span<const double> t_list,
                      const OracleOptions& opts = {});

struct LmoCheck {
  bool ok = false;
  double worst_margin = 0.0;  // min over candidates of <g, z> - <g, delta>
  Index candidates = 0;
  bool feasible = false;
};

/// Compares the module oracle against enumerated vertices (l1) or random
/// boundary points (other kinds).
LmoCheck brute_lmo_check(const Regularizer& reg, const Vector& grad, double eps, Index samples,
                         std::uint64_t seed = 1);

struct RidgeSolution {
  double lambda = 0.0;
  Vector beta;
  bool singular = false;
};

/// (X^T X + 2 lambda Q)^{-1} X^T y for each lambda.
std::vector<RidgeSolution> closed_form_ridge(const Matrix& X, const Vector& y, const Matrix& Q,
                                             std::span<const double> lambdas);

struct GenlassoSolution {
  double lambda = 0.0;
  Vector beta;
  Vector u;
  double primal = 0.0;
  double dual = 0.0;
  Index iterations = 0;
  bool converged = false;
  double gap() const { return primal - dual; }
};

/// min 1/2 ||y - beta||^2 + lambda ||D beta||_1 through its dual
/// min 1/2 ||y - D^T u||^2 subject to ||u||_inf <= lambda.
GenlassoSolution genlasso_lagrange(const Vector& y, const PenaltyMatrix& D, double lambda,
                                   double gap_tol = 1e-10, Index max_iter = 200000,
                                   const Vector* u0 = nullptr);

/// min 1/2 ||y - beta||^2 subject to ||D beta||_1 <= t, by bisection on the
/// Lagrange parameter. The gap combines the primal value of a feasible point
/// with the Lagrangian lower bound.
CertifiedSolution genlasso_constrained(const Vector& y, const PenaltyMatrix& D, double t,
                                       double gap_tol = 1e-8);

}  // namespace stagewise
