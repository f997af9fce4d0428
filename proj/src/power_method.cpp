#include "stagewise/power_method.hpp"

#include <cmath>
#include <random>

namespace stagewise {

namespace {

Vector random_unit(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = normal(rng);
  return x / x.norm();
}

void fix_sign(Vector& u, Vector& v) {
  Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0) {
    u = -u;
    v = -v;
  }
}

}  // namespace

SingularTriplet leading_singular(const Matrix& A, const PowerMethodConfig& cfg) {
  const Index m = A.rows(), n = A.cols();
  if (m == 0 || n == 0) throw InputError("power method: empty matrix");
  if (!A.allFinite()) throw NumericError("power method: non-finite input");
  SingularTriplet out;
  if (A.cwiseAbs().maxCoeff() == 0.0) {
    out.u = Vector::Unit(m, 0);
    out.v = Vector::Unit(n, 0);
    return out;
  }

  const bool right = n <= m;  // iterate on v (A^T A) or on u (A A^T)
  const Matrix G = right ? Matrix(A.transpose() * A) : Matrix(A * A.transpose());
  Vector x = random_unit(G.rows(), cfg.seed);
  double rq_prev = -1.0;
  double residual = INFINITY;

  for (Index it = 1; it <= cfg.max_iter; ++it) {
    Vector y = G * x;
    const double rq = x.dot(y);
    double ny = y.norm();
    if (ny == 0.0) {
      // start vector orthogonal to the range; restart from the heaviest column
      Index j = 0;
      G.colwise().norm().maxCoeff(&j);
      y = G.col(j);
      ny = y.norm();
    }
    x = y / ny;
    if (rq_prev > 0 && std::fabs(rq - rq_prev) <= cfg.rq_tol * rq) {
      Vector other = right ? Vector(A * x) : Vector(A.transpose() * x);
      const double sigma = other.norm();
      other /= sigma;
      const Vector back = right ? Vector(A.transpose() * other) : Vector(A * other);
      residual = (back - sigma * x).norm() / sigma;
      if (residual <= cfg.tol) {
        out.sigma = sigma;
        out.u = right ? other : x;
        out.v = right ? x : other;
        out.iterations = it;
        out.residual = residual;
        fix_sign(out.u, out.v);
        return out;
      }
    }
    rq_prev = rq;
  }
  throw ConvergenceError("power method did not converge in " + std::to_string(cfg.max_iter) +
                             " iterations",
                         residual);
}

}  // namespace stagewise
