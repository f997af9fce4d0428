#pragma once

#include <cstdint>

#include "stagewise/types.hpp"

namespace stagewise {

struct PowerMethodConfig {
  Index max_iter = 1000;
  // Relative change of the Rayleigh quotient between iterations.
  double rq_tol = 1e-10;
  // Required ||A^T u - sigma v|| / sigma at exit.
  double tol = 1e-8;
  std::uint64_t seed = 0x5eedULL;
};

struct SingularTriplet {
  double sigma = 0.0;
  Vector u;
  Vector v;
  Index iterations = 0;
  double residual = 0.0;
};

/// Leading singular triplet of A by power iteration on the smaller Gram
/// matrix. Signs are fixed so that u^T A v = sigma > 0 and the largest entry
/// of v (first on ties) is positive. A zero matrix gives sigma = 0 with u, v
/// set to the first coordinate vectors.
/// Throws ConvergenceError if the residual test is not met in max_iter steps.
SingularTriplet leading_singular(const Matrix& A, const PowerMethodConfig& cfg = {});

}  // namespace stagewise
