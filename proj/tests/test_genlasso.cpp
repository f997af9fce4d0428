#include <cstring>
#include <random>

#include "doctest.h"
#include "stagewise/genlasso.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("dual step sign pattern") {
  const PenaltyMatrix D = PenaltyMatrix::chain(3);
  Vector y(3);
  y << 1, 1, 2;
  const GaussianSignalLoss loss(y);
  DualState st = dual_init(loss, D);
  CHECK(st.u.size() == 2);
  CHECK(st.beta == y);
  dual_step(st, y, D, 0.1);
  CHECK(st.u(0) == 0.0);
  CHECK(st.u(1) == doctest::Approx(-0.1));
  CHECK(st.lambda == doctest::Approx(0.1));
}

TEST_CASE("primal recovery matches the direct recursion") {
  const PenaltyMatrix D = PenaltyMatrix::chain(2);
  Vector y(2);
  y << 0.0, 1.0;
  const GaussianSignalLoss loss(y);
  GenlassoConfig cfg;
  cfg.epsilon = 0.1;
  cfg.max_steps = 5;
  cfg.record = RecordPolicy::all();
  const Path a = run_genlasso_gaussian(y, D, cfg);
  const Path b = run_genlasso_dual(loss, D, cfg);
  REQUIRE(a.size() == b.size());
  CHECK((a.final_state - b.final_state).norm() < 1e-12);
  CHECK(a.final_state(0) == doctest::Approx(0.5));
  CHECK(a.final_state(1) == doctest::Approx(0.5));
}

TEST_CASE("dyadic inputs make both recursions bitwise equal") {
  std::mt19937_64 rng(3);
  const PenaltyMatrix D = PenaltyMatrix::grid2d(6, 5);
  Vector y = testutil::gauss(rng, 30);
  for (Index i = 0; i < y.size(); ++i) y(i) = std::ldexp(std::round(std::ldexp(y(i), 20)), -20);
  GenlassoConfig cfg;
  cfg.epsilon = 1.0 / 256;
  cfg.max_steps = 400;
  cfg.record = RecordPolicy::all();
  cfg.timing = false;
  const Path a = run_genlasso_gaussian(y, D, cfg);
  const Path b = run_genlasso_dual(GaussianSignalLoss(y), D, cfg);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    REQUIRE(a.records[k].state);
    REQUIRE(b.records[k].state);
    CHECK(std::memcmp(a.records[k].state->data(), b.records[k].state->data(), 30 * sizeof(double)) == 0);
    CHECK(a.records[k].lambda == b.records[k].lambda);
  }
}

TEST_CASE("generalized lasso path runs towards regularization") {
  std::mt19937_64 rng(5);
  const Vector y = testutil::gauss(rng, 15);
  GenlassoConfig cfg;
  cfg.epsilon = 0.01;
  cfg.max_steps = 300;
  const Path p = run_genlasso_gaussian(y, PenaltyMatrix::chain(15), cfg);
  CHECK(p.regularizing);
  CHECK(p.back().t < p.records.front().t);
  CHECK(p.back().lambda > 0.0);
  CHECK(p.records.front().f == 0.0);
}

TEST_CASE("primal recovery rejects other losses") {
  Matrix X = Matrix::Identity(2, 2);
  const LeastSquaresLoss ls({X, Vector::Ones(2)});
  CHECK_THROWS_AS(primal_recover(Vector::Zero(1), ls, PenaltyMatrix::chain(2)), UnsupportedError);
}
