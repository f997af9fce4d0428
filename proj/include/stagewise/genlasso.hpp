#pragma once

#include "stagewise/engine.hpp"
#include "stagewise/losses.hpp"
#include "stagewise/penalty.hpp"

namespace stagewise {

struct DualState {
  Vector u;
  Vector beta;
  double lambda = 0.0;  // ||u||_inf
};

/// u = 0, beta = y.
DualState dual_init(const GaussianSignalLoss& loss, const PenaltyMatrix& D);

/// u_i -= eps * sign((D beta_prev)_i), sign(0) = 0. Updates lambda but not beta.
void dual_step(DualState& state, const Vector& beta_prev, const PenaltyMatrix& D, double eps);

/// Solves grad f(beta) = D^T u; only the Gaussian signal loss is wired in.
Vector primal_recover(const Vector& u, const Loss& loss, const PenaltyMatrix& D);

struct GenlassoConfig {
  double epsilon = 0.01;
  Index max_steps = 100;
  RecordPolicy record{};
  bool timing = true;
};

/// Direct primal recursion beta <- beta - eps D^T sign(D beta) from beta = y.
/// Records t = g = ||D beta||_1 and lambda = ||u||_inf; the path runs towards
/// increasing regularization.
Path run_genlasso_gaussian(const Vector& y, const PenaltyMatrix& D, const GenlassoConfig& cfg);

/// Same path through dual_step followed by primal_recover.
Path run_genlasso_dual(const GaussianSignalLoss& loss, const PenaltyMatrix& D,
                       const GenlassoConfig& cfg);

}  // namespace stagewise
