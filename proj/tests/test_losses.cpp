#include <random>

#include "doctest.h"
#include "stagewise/losses.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("least squares value and gradient") {
  Matrix X(2, 2);
  X << 1, 0, 0, 2;
  const Vector y = Vector::Constant(2, 1.0);
  const LeastSquaresLoss loss({X, y});
  const Vector b = Vector::Zero(2);
  CHECK(loss.value(b) == doctest::Approx(1.0));
  const Vector g = loss.gradient(b);
  CHECK(g(0) == doctest::Approx(-1.0));
  CHECK(g(1) == doctest::Approx(-2.0));
}

TEST_CASE("dimension mismatch is an input error") {
  std::mt19937_64 g(1);
  const auto loss = testutil::ls(g, 5, 3);
  CHECK_THROWS_AS(loss.value(Vector::Zero(4)), InputError);
}

TEST_CASE("invalid responses are rejected") {
  Matrix X = Matrix::Identity(2, 2);
  Vector y(2);
  y << 0.0, 2.0;
  CHECK_THROWS_AS(GlmLoss({X, y}, GlmFamily::Logistic), InputError);
  y << -1.0, 2.0;
  CHECK_THROWS_AS(GlmLoss({X, y}, GlmFamily::Poisson), InputError);
  CHECK_THROWS_AS(ObservedMatrix(2, 2, {{2, 0, 1.0}}), InputError);
}

TEST_CASE("finite differences match analytic gradients") {
  std::mt19937_64 g(3);
  const Matrix X = testutil::gauss(g, 15, 6);
  Vector yb(15), yc(15);
  for (Index i = 0; i < 15; ++i) {
    yb(i) = i % 2;
    yc(i) = static_cast<double>(i % 4);
  }
  std::vector<std::unique_ptr<Loss>> losses;
  losses.push_back(std::make_unique<LeastSquaresLoss>(Dataset{X, testutil::gauss(g, 15)}));
  losses.push_back(std::make_unique<GlmLoss>(Dataset{X, yb}, GlmFamily::Logistic));
  losses.push_back(std::make_unique<GlmLoss>(Dataset{0.3 * X, yc}, GlmFamily::Poisson));
  losses.push_back(std::make_unique<MatrixCompletionLoss>(
      ObservedMatrix(3, 2, {{0, 0, 1.0}, {2, 1, -1.0}, {1, 1, 0.5}})));
  losses.push_back(std::make_unique<GaussianSignalLoss>(testutil::gauss(g, 6)));
  for (const auto& loss : losses) {
    const Vector x = 0.5 * testutil::gauss(g, loss->dim());
    const Vector fd = finite_difference_gradient(*loss, x);
    const Vector an = loss->gradient(x);
    CHECK((fd - an).norm() <= 1e-5 * std::max(1.0, an.norm()));
  }
}

TEST_CASE("losses are convex along random segments") {
  std::mt19937_64 g(5);
  const Matrix X = testutil::gauss(g, 10, 4);
  Vector yb(10);
  for (Index i = 0; i < 10; ++i) yb(i) = (i * 7) % 3 == 0;
  const GlmLoss loss({X, yb}, GlmFamily::Logistic);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector a = testutil::gauss(g, 4), b = testutil::gauss(g, 4);
    const double mid = loss.value(0.5 * (a + b));
    CHECK(mid <= 0.5 * (loss.value(a) + loss.value(b)) + 1e-12);
  }
}

TEST_CASE("matrix completion gradient vanishes off the observed set") {
  const MatrixCompletionLoss loss(ObservedMatrix(2, 2, {{1, 0, 3.0}}));
  Vector b(4);
  b << 1.0, 2.0, 3.0, 4.0;
  const Vector gr = loss.gradient(b);
  CHECK(gr(0) == 0.0);
  CHECK(gr(1) == doctest::Approx(-1.0));
  CHECK(gr(2) == 0.0);
  CHECK(gr(3) == 0.0);
  CHECK(loss.value(b) == doctest::Approx(0.5));
}

TEST_CASE("gaussian signal conjugate gradient") {
  Vector y(3);
  y << 1, 2, 3;
  const GaussianSignalLoss loss(y);
  Vector z(3);
  z << -1, 0, 1;
  CHECK((loss.conjugate_gradient(z) - (y + z)).norm() == 0.0);
}

TEST_CASE("large linear predictors stay finite") {
  Matrix X(1, 1);
  X << 1.0;
  Vector y(1);
  y << 0.0;
  const GlmLoss logit({X, y}, GlmFamily::Logistic);
  Vector b(1);
  b << 800.0;
  CHECK(std::isfinite(logit.value(b)));
  CHECK(logit.value(b) == doctest::Approx(800.0));
  CHECK(std::isfinite(logit.gradient(b)(0)));
}
