#include "stagewise/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "stagewise/projection.hpp"

namespace stagewise {

namespace {

double sigma_max_sq(const Matrix& X) {
  const Matrix G = X.cols() <= X.rows() ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

// Norm-form duality gap; the trace dual goes through a dense SVD.
double certify(const Loss& loss, const Regularizer& reg, const Vector& x, double t, Vector& grad,
               double& f) {
  f = loss.value_grad(x, grad);
  return grad.dot(x) + t * reg.dual_value(grad);
}

}  // namespace

std::optional<double> loss_lipschitz(const Loss& loss) {
  switch (loss.kind()) {
    case LossKind::LeastSquares:
      return sigma_max_sq(static_cast<const LeastSquaresLoss&>(loss).data().X);
    case LossKind::Logistic:
      return 0.25 * sigma_max_sq(static_cast<const GlmLoss&>(loss).data().X);
    case LossKind::MatrixCompletion:
    case LossKind::GaussianSignal:
      return 1.0;
    case LossKind::Poisson:
      return std::nullopt;
  }
  return std::nullopt;
}

CertifiedSolution solve_constrained(const Loss& loss, const Regularizer& reg, double t,
                                    const OracleOptions& opts, const std::optional<Vector>& x0) {
  if (!reg.is_norm()) {
    throw UnsupportedError("no constrained oracle for " + reg.describe() +
                           "; compare against closed_form_ridge instead");
  }
  if (!(t >= 0.0)) throw InputError("oracle: t must be nonnegative");
  if (!(opts.gap_tol > 0.0)) throw InputError("oracle: gap_tol must be positive");
  const Index p = reg.dim();
  if (loss.dim() != p) throw InputError("oracle: loss and regularizer dimensions differ");

  CertifiedSolution best;
  best.t = t;
  best.gap = INFINITY;
  Vector x = x0 ? project_ball(reg, *x0, t) : Vector::Zero(p);
  Vector grad;
  double f = 0.0;
  const auto consider = [&](const Vector& cand, Index it) {
    const double gap = certify(loss, reg, cand, t, grad, f);
    if (gap < best.gap) {
      best.x = cand;
      best.gap = gap;
      best.f = f;
    }
    best.iterations = it;
    best.converged = best.gap <= opts.gap_tol;
    return best.converged;
  };
  if (consider(x, 0) || t == 0.0) return best;

  const std::optional<double> Lfix = loss_lipschitz(loss);
  double L;
  if (Lfix) {
    L = std::max(*Lfix, 1e-12);
  } else {
    // secant estimate, then backtracking
    Vector d = Vector::Constant(p, 1e-4 / std::sqrt(static_cast<double>(p)));
    const Vector g0 = loss.gradient(x);
    L = std::max(1e-8, (loss.gradient(x + d) - g0).norm() / d.norm());
  }

  Vector y = x, gy, z;
  double theta = 1.0;
  for (Index it = 1; it <= opts.max_iter; ++it) {
    const double fy = loss.value_grad(y, gy);
    for (;;) {
      z = project_ball(reg, y - gy / L, t);
      if (Lfix) break;
      const Vector d = z - y;
      const double fz = loss.value(z);
      if (fz <= fy + gy.dot(d) + 0.5 * L * d.squaredNorm() + 1e-15 * std::fabs(fy)) break;
      L *= 2.0;
    }
    if ((y - z).dot(z - x) > 0.0) {
      // momentum is pointing uphill: restart
      theta = 1.0;
      y = z;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = z + ((theta - 1.0) / theta_next) * (z - x);
      theta = theta_next;
    }
    x = z;
    if (it % opts.check_every == 0 || it == opts.max_iter) {
      if (consider(x, it)) return best;
    }
  }
  return best;
}

bool OracleGrid::all_converged() const {
  return std::all_of(solutions.begin(), solutions.end(),
                     [](const CertifiedSolution& s) { return s.converged; });
}

double OracleGrid::worst_gap() const {
  double w = 0.0;
  for (const auto& s : solutions) w = std::max(w, s.gap);
  return w;
}

OracleGrid solve_grid(const Loss& loss, const Regularizer& reg, std::span<const double> t_list,
                      const OracleOptions& opts) {
  OracleGrid grid;
  grid.gap_tol = opts.gap_tol;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    if (!(t_list[i] >= 0.0)) throw InputError("solve_grid: t values must be nonnegative");
    if (i > 0 && !(t_list[i] > t_list[i - 1])) throw InputError("solve_grid: t values must ascend");
  }
  std::optional<Vector> warm;
  for (double t : t_list) {
    CertifiedSolution s = solve_constrained(loss, reg, t, opts, opts.warm_start ? warm : std::nullopt);
    if (opts.warm_start) warm = s.x;
    grid.t.push_back(t);
    grid.solutions.push_back(std::move(s));
  }
  return grid;
}

LmoCheck brute_lmo_check(const Regularizer& reg, const Vector& grad, double eps, Index samples,
                         std::uint64_t seed) {
  const Index p = reg.dim();
  const Vector delta = reg.lmo(grad, eps);
  const double base = grad.dot(delta);
  LmoCheck out;
  out.feasible = reg.value(delta) <= eps + 1e-9;
  out.worst_margin = INFINITY;
  const auto test = [&](const Vector& z) {
    out.worst_margin = std::min(out.worst_margin, grad.dot(z) - base);
    ++out.candidates;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto gaussian = [&](Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };

  switch (reg.kind()) {
    case RegKind::L1:
      for (Index j = 0; j < p; ++j) {
        for (double s : {1.0, -1.0}) {
          Vector z = Vector::Zero(p);
          z(j) = s * eps;
          test(z);
        }
      }
      break;
    case RegKind::Group: {
      const auto& gr = static_cast<const GroupRegularizer&>(reg);
      const auto& part = gr.partition();
      std::uniform_int_distribution<Index> pick(0, part.count() - 1);
      for (Index s = 0; s < samples; ++s) {
        Vector z = gaussian(p);
        if (s % 2 == 1) {
          // boundary point supported on a single group
          const Index j = pick(rng);
          const double w = part.weights[static_cast<std::size_t>(j)];
          if (w == 0.0) continue;
          Vector block = Vector::Zero(p);
          for (Index i : part.groups[static_cast<std::size_t>(j)]) block(i) = z(i);
          z = block;
        }
        const double g = gr.value(z);
        if (g > 0.0) test(z * (eps / g));
      }
      break;
    }
    case RegKind::Trace: {
      const auto& tr = static_cast<const TraceRegularizer&>(reg);
      for (Index s = 0; s < samples; ++s) {
        const Vector a = gaussian(tr.rows()).normalized();
        const Vector b = gaussian(tr.cols()).normalized();
        const Matrix Z = eps * a * b.transpose();
        test(Eigen::Map<const Vector>(Z.data(), Z.size()));
      }
      break;
    }
    case RegKind::Quadratic: {
      const auto& qr = static_cast<const QuadraticRegularizer&>(reg);
      for (Index s = 0; s < samples; ++s) {
        const Vector z = qr.form().project_row(gaussian(p));
        const double q = qr.form().quad(z);
        if (q > 0.0) test(z * std::sqrt(eps / q));
      }
      break;
    }
  }
  out.ok = out.feasible && out.worst_margin >= -1e-9;
  return out;
}

std::vector<RidgeSolution> closed_form_ridge(const Matrix& X, const Vector& y, const Matrix& Q,
                                             std::span<const double> lambdas) {
  if (X.rows() != y.size() || Q.rows() != X.cols() || Q.cols() != X.cols()) {
    throw InputError("closed_form_ridge: dimension mismatch");
  }
  const Matrix XtX = X.transpose() * X;
  const Vector Xty = X.transpose() * y;
  std::vector<RidgeSolution> out;
  for (double lambda : lambdas) {
    RidgeSolution s;
    s.lambda = lambda;
    const Matrix A = XtX + 2.0 * lambda * Q;
    Eigen::LDLT<Matrix> ldlt(A);
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13 ||
        ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
      s.singular = true;
      s.beta = Vector::Constant(X.cols(), std::numeric_limits<double>::quiet_NaN());
    } else {
      s.beta = ldlt.solve(Xty);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

// ||D||_2^2 <= ||D||_1 ||D||_inf
double penalty_norm_sq_bound(const PenaltyMatrix& D) {
  Vector col = Vector::Zero(D.cols());
  double row_max = 0.0;
  for (Index i = 0; i < D.rows(); ++i) {
    double r = 0.0;
    for (const auto& e : D.row(i)) {
      r += std::fabs(e.value);
      col(e.col) += std::fabs(e.value);
    }
    row_max = std::max(row_max, r);
  }
  return row_max * col.maxCoeff();
}

void evaluate(const Vector& y, const PenaltyMatrix& D, double lambda, GenlassoSolution& s) {
  s.beta = y;
  D.apply_transpose_add(-1.0, s.u, s.beta);
  const Vector r = y - s.beta;  // D^T u
  s.primal = 0.5 * r.squaredNorm() + lambda * D.apply(s.beta).cwiseAbs().sum();
  s.dual = 0.5 * y.squaredNorm() - 0.5 * s.beta.squaredNorm();
}

}  // namespace

GenlassoSolution genlasso_lagrange(const Vector& y, const PenaltyMatrix& D, double lambda,
                                   double gap_tol, Index max_iter, const Vector* u0) {
  if (y.size() != D.cols()) throw InputError("genlasso_lagrange: dimension mismatch");
  if (!(lambda >= 0.0)) throw InputError("genlasso_lagrange: lambda must be nonnegative");
  const double L = penalty_norm_sq_bound(D);
  const auto clip = [lambda](const Vector& v) -> Vector { return v.cwiseMax(-lambda).cwiseMin(lambda); };

  GenlassoSolution s;
  s.lambda = lambda;
  s.u = u0 ? clip(*u0) : Vector::Zero(D.rows());
  evaluate(y, D, lambda, s);
  GenlassoSolution best = s;
  if (best.gap() <= gap_tol) {
    best.converged = true;
    return best;
  }
  Vector x = s.u, v = s.u;
  double theta = 1.0;
  for (Index it = 1; it <= max_iter; ++it) {
    // grad = D (D^T v - y)
    Vector r = -y;
    D.apply_transpose_add(1.0, v, r);
    const Vector g = D.apply(r);
    const Vector z = clip(v - g / L);
    if ((v - z).dot(z - x) > 0.0) {
      theta = 1.0;
      v = z;
    } else {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      v = z + ((theta - 1.0) / tn) * (z - x);
      theta = tn;
    }
    x = z;
    if (it % 10 == 0 || it == max_iter) {
      s.u = x;
      evaluate(y, D, lambda, s);
      s.iterations = it;
      if (s.gap() < best.gap()) best = s;
      best.iterations = it;
      if (best.gap() <= gap_tol) {
        best.converged = true;
        return best;
      }
    }
  }
  return best;
}

CertifiedSolution genlasso_constrained(const Vector& y, const PenaltyMatrix& D, double t,
                                       double gap_tol) {
  if (y.size() != D.cols()) throw InputError("genlasso_constrained: dimension mismatch");
  if (!(t >= 0.0)) throw InputError("genlasso_constrained: t must be nonnegative");
  CertifiedSolution out;
  out.t = t;
  const auto level = [&](const Vector& b) { return D.apply(b).cwiseAbs().sum(); };
  if (level(y) <= t) {
    out.x = y;
    out.f = 0.0;
    out.gap = 0.0;
    out.converged = true;
    return out;
  }
  if (t == 0.0) {
    // projection of y onto null(D)
    const Matrix Dt = D.dense().transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Dt);
    const Vector u = cod.solve(y);
    out.x = y - Dt * u;
    out.f = 0.5 * (y - out.x).squaredNorm();
    out.gap = 0.0;
    out.converged = true;
    return out;
  }

  const double inner_tol = std::max(1e-14, 0.01 * gap_tol);
  double lower = -INFINITY;
  const auto solve = [&](double lambda, const Vector* warm) {
    GenlassoSolution s = genlasso_lagrange(y, D, lambda, inner_tol, 200000, warm);
    lower = std::max(lower, s.dual - lambda * t);
    return s;
  };

  double lo = 0.0, hi = 1.0;
  GenlassoSolution s_hi = solve(hi, nullptr);
  while (level(s_hi.beta) > t) {
    lo = hi;
    hi *= 2.0;
    s_hi = solve(hi, &s_hi.u);
    if (hi > 1e12) throw ConvergenceError("genlasso_constrained: no feasible lambda found", hi);
  }
  Vector warm = s_hi.u;
  Index iterations = s_hi.iterations;
  for (int it = 0; it < 200; ++it) {
    const double upper = 0.5 * (y - s_hi.beta).squaredNorm();
    if (upper - lower <= gap_tol) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    GenlassoSolution s = solve(mid, &warm);
    iterations += s.iterations;
    warm = s.u;
    if (level(s.beta) <= t) {
      hi = mid;
      s_hi = std::move(s);
    } else {
      lo = mid;
    }
  }
  out.x = s_hi.beta;
  out.f = 0.5 * (y - out.x).squaredNorm();
  out.gap = out.f - lower;
  out.iterations = iterations;
  out.converged = out.gap <= gap_tol;
  return out;
}

}  // namespace stagewise
