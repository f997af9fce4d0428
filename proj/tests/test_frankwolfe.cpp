#include <random>

#include "doctest.h"
#include "stagewise/frankwolfe.hpp"
#include "stagewise/oracle.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("duality gap bounds suboptimality") {
  std::mt19937_64 rng(1);
  const auto loss = testutil::ls(rng, 20, 5);
  const L1Regularizer reg(5);
  const double t = 0.8;
  const CertifiedSolution best = solve_constrained(loss, reg, t, {1e-12});
  REQUIRE(best.converged);
  for (int i = 0; i < 20; ++i) {
    Vector x = testutil::gauss(rng, 5);
    x *= t / std::max(reg.value(x), 1e-12) * 0.9;
    CHECK(loss.value(x) - best.f <= duality_gap(x, t, loss, reg) + 1e-10);
  }
  Vector far = Vector::Constant(5, 10.0);
  CHECK_THROWS_AS(duality_gap(far, t, loss, reg), InputError);
}

TEST_CASE("Frank-Wolfe reaches the requested gap") {
  std::mt19937_64 rng(2);
  const auto loss = testutil::ls(rng, 25, 6);
  const GroupRegularizer reg(GroupPartition::equal(6, 3));
  const CertifiedSolution s = run_fw(loss, reg, {0.5, 1e-6, 100000});
  CHECK(s.converged);
  CHECK(s.gap <= 1e-6);
  CHECK(feasible(reg, s.x, 0.5));
  const CertifiedSolution capped = run_fw(loss, reg, {0.5, 1e-14, 3});
  CHECK_FALSE(capped.converged);
}

TEST_CASE("t = 0 gives the origin") {
  std::mt19937_64 rng(3);
  const auto loss = testutil::ls(rng, 10, 3);
  const L1Regularizer reg(3);
  CHECK(constrained_lmo(reg, loss.gradient(Vector::Zero(3)), 0.0).norm() == 0.0);
  CHECK(run_fw(loss, reg, {0.0}).x.norm() == 0.0);
}

TEST_CASE("one-step Frank-Wolfe keeps a single active coordinate") {
  std::mt19937_64 rng(4);
  const auto loss = testutil::ls(rng, 20, 8);
  const L1Regularizer reg(8);
  Vector x = Vector::Zero(8);
  for (double t : {0.1, 0.2, 0.3, 0.4}) {
    x = one_step_fw(loss, reg, x, t);
    Index nz = 0;
    for (Index i = 0; i < 8; ++i) nz += x(i) != 0.0;
    CHECK(nz == 1);
    CHECK(reg.value(x) == doctest::Approx(t));
  }
}

TEST_CASE("path following keeps the gamma guarantee") {
  std::mt19937_64 rng(5);
  const auto loss = testutil::ls(rng, 20, 6);
  const GroupRegularizer reg(GroupPartition::equal(6, 3));
  const double gamma = 0.5;
  const FWPath path = fw_path_follow(loss, reg, gamma, 2.0, 0.0, 2.0);
  REQUIRE(path.breakpoints.size() >= 2);
  CHECK(path.all_converged);
  for (double t : {0.3, 0.7, 1.1, 1.5}) {
    if (t > path.covered_to) continue;
    const auto& bp = fw_path_at(path, t);
    const CertifiedSolution opt = solve_constrained(loss, reg, t, {1e-10});
    CHECK(loss.value(bp.x) - opt.f <= gamma + 1e-6);
  }
  CHECK_THROWS_AS(fw_path_follow(loss, reg, gamma, 1.0, 0.0, 2.0), InputError);
}
