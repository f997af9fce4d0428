#include <random>

#include "doctest.h"
#include "stagewise/oracle.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("orthogonal design lasso matches soft thresholding") {
  Matrix X = Matrix::Identity(2, 2);
  Vector y(2);
  y << 3.0, 1.0;
  const LeastSquaresLoss loss({X, y});
  const L1Regularizer reg(2);
  const CertifiedSolution s = solve_constrained(loss, reg, 1.0, {1e-12});
  CHECK(s.converged);
  CHECK(s.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(s.x(1)) < 1e-6);
  const CertifiedSolution s2 = solve_constrained(loss, reg, 3.0, {1e-12});
  CHECK(s2.x(0) == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(s2.x(1) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("oracle grid warm starts and certifies every kind") {
  std::mt19937_64 rng(2);
  const std::vector<double> ts{0.0, 0.5, 1.0, 2.0};
  const auto loss = testutil::ls(rng, 15, 6);
  const OracleGrid l1 = solve_grid(loss, L1Regularizer(6), ts, {1e-9});
  CHECK(l1.all_converged());
  CHECK(l1.worst_gap() <= 1e-9);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(l1.solutions[i].f <= l1.solutions[i - 1].f + 1e-12);
  const OracleGrid gr = solve_grid(loss, GroupRegularizer(GroupPartition::equal(6, 2, GroupNorm::Linf)), ts, {1e-9});
  CHECK(gr.all_converged());
  const MatrixCompletionLoss mc(ObservedMatrix(3, 2, {{0, 0, 1.0}, {1, 1, 2.0}, {2, 0, -1.0}, {0, 1, 0.5}}));
  const OracleGrid tr = solve_grid(mc, TraceRegularizer(3, 2), ts, {1e-9});
  CHECK(tr.all_converged());
  const std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(solve_grid(loss, L1Regularizer(6), bad), InputError);
}

TEST_CASE("quadratic regularizer has no constrained oracle") {
  std::mt19937_64 rng(3);
  const auto loss = testutil::ls(rng, 5, 3);
  const QuadraticRegularizer reg(QuadraticForm::dense(Matrix::Identity(3, 3)));
  CHECK_THROWS_AS(solve_constrained(loss, reg, 1.0), UnsupportedError);
}

TEST_CASE("closed form ridge") {
  std::mt19937_64 rng(4);
  const Matrix X = testutil::gauss(rng, 10, 3);
  const Vector y = testutil::gauss(rng, 10);
  const std::vector<double> lambdas{0.0, 1.0};
  const auto sols = closed_form_ridge(X, y, Matrix::Identity(3, 3), lambdas);
  REQUIRE(sols.size() == 2);
  const Vector g = X.transpose() * (X * sols[1].beta - y) + 2.0 * sols[1].beta;
  CHECK(g.norm() < 1e-10);
  CHECK_FALSE(sols[0].singular);
}

TEST_CASE("generalized lasso oracles") {
  std::mt19937_64 rng(5);
  const Vector y = testutil::gauss(rng, 12);
  const PenaltyMatrix D = PenaltyMatrix::chain(12);
  const GenlassoSolution s = genlasso_lagrange(y, D, 0.5, 1e-11);
  CHECK(s.converged);
  CHECK(s.gap() <= 1e-11);
  CHECK(s.gap() >= -1e-12);
  CHECK(s.u.cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
  const double t = D.apply(y).cwiseAbs().sum() / 3.0;
  const CertifiedSolution c = genlasso_constrained(y, D, t, 1e-9);
  CHECK(c.converged);
  CHECK(D.apply(c.x).cwiseAbs().sum() <= t * (1 + 1e-9) + 1e-9);
  const CertifiedSolution zero = genlasso_constrained(y, D, 0.0);
  CHECK((zero.x.array() - y.mean()).abs().maxCoeff() < 1e-10);
  const CertifiedSolution loose = genlasso_constrained(y, D, 1e6);
  CHECK((loose.x - y).norm() == 0.0);
}

TEST_CASE("brute force oracle check catches a bad direction") {
  const L1Regularizer reg(3);
  Vector g(3);
  g << 1.0, -2.0, 0.5;
  CHECK(brute_lmo_check(reg, g, 0.1, 0).ok);
}
