#pragma once

#include "stagewise/regularizers.hpp"

namespace stagewise {

/// Euclidean projection onto {x : ||x||_1 <= t}.
Vector project_l1_ball(const Vector& v, double t);

/// Proximal map of c * h for a single block norm h.
Vector block_prox(const Vector& v, double c, GroupNorm norm);

/// Euclidean projection onto {x : g(x) <= t} for l1, group and trace
/// regularizers. The result is always feasible.
Vector project_ball(const Regularizer& reg, const Vector& x, double t);

}  // namespace stagewise
