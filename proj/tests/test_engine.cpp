#include <random>

#include "doctest.h"
#include "stagewise/engine.hpp"
#include "stagewise/oracle.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("pure stagewise invariants") {
  std::mt19937_64 rng(1);
  const auto loss = testutil::ls(rng, 20, 6);
  const L1Regularizer reg(6);
  StagewiseConfig cfg;
  cfg.epsilon = 0.05;
  cfg.max_steps = 60;
  cfg.record = RecordPolicy::all();
  cfg.timing = false;
  const Path p = run_stagewise(loss, reg, cfg);
  REQUIRE(p.size() == 61);
  for (Index k = 0; k < p.size(); ++k) {
    const auto& r = p.records[static_cast<std::size_t>(k)];
    CHECK(r.step == k);
    CHECK(r.t == doctest::Approx(0.05 * static_cast<double>(k)));
    // triangle inequality
    CHECK(r.g <= r.t + 1e-12);
    REQUIRE(r.state);
    CHECK(r.g == doctest::Approx(reg.value(*r.state)));
    CHECK(r.f == doctest::Approx(loss.value(*r.state)));
    CHECK(r.wall_ns == 0);
  }
  CHECK(p.back().f < p.records.front().f);
}

TEST_CASE("zero gradient stops as stationary") {
  Matrix X = Matrix::Identity(2, 2);
  const LeastSquaresLoss loss({X, Vector::Zero(2)});
  const L1Regularizer reg(2);
  StagewiseConfig cfg;
  cfg.max_steps = 10;
  const Path p = run_stagewise(loss, reg, cfg);
  CHECK(p.status == StopReason::Stationary);
  CHECK(p.size() == 1);
}

TEST_CASE("config validation") {
  StagewiseConfig cfg;
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg.epsilon = 0.1;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  CHECK(StagewiseConfig::auto_alpha(0.1) == doctest::Approx(0.99));
}

TEST_CASE("resume continues bitwise") {
  std::mt19937_64 rng(2);
  const auto loss = testutil::ls(rng, 15, 5);
  const L1Regularizer reg(5);
  StagewiseConfig cfg;
  cfg.epsilon = 0.01;
  cfg.max_steps = 40;
  cfg.record = RecordPolicy::all();
  cfg.timing = false;
  const Path full = run_stagewise(loss, reg, cfg);
  cfg.max_steps = 20;
  const Path half = run_stagewise(loss, reg, cfg);
  const StagewiseConfig next = resume_config(half, cfg);
  const Path rest = run_stagewise(loss, reg, next);
  CHECK(rest.final_state == full.final_state);
  CHECK(config_hash(loss, reg, cfg) == config_hash(loss, reg, cfg));
}

TEST_CASE("shrunken stagewise recursion on t") {
  std::mt19937_64 rng(3);
  const auto loss = testutil::ls(rng, 10, 4);
  const L1Regularizer reg(4);
  StagewiseConfig cfg;
  cfg.epsilon = 0.1;
  cfg.alpha = 0.9;
  cfg.max_steps = 30;
  cfg.record = RecordPolicy::all();
  const Path p = run_shrunken(loss, reg, cfg);
  double t = 0.0;
  for (Index k = 1; k < p.size(); ++k) {
    t = 0.9 * t + 0.1;
    CHECK(p.records[static_cast<std::size_t>(k)].t == doctest::Approx(t));
    CHECK(p.records[static_cast<std::size_t>(k)].g <= t + 1e-12);
  }
}

TEST_CASE("record policies") {
  std::mt19937_64 rng(4);
  const auto loss = testutil::ls(rng, 10, 4);
  const L1Regularizer reg(4);
  StagewiseConfig cfg;
  cfg.max_steps = 25;
  cfg.record = RecordPolicy::every(10);
  const Path p = run_stagewise(loss, reg, cfg);
  Index snaps = 0;
  for (const auto& r : p.records) snaps += r.state.has_value();
  CHECK(snaps == 4);  // 0, 10, 20 and the final step
  CHECK(RecordPolicy{}.stride(100000) == 200);
}

TEST_CASE("interpolation and range errors") {
  std::mt19937_64 rng(5);
  const auto loss = testutil::ls(rng, 10, 3);
  const L1Regularizer reg(3);
  StagewiseConfig cfg;
  cfg.epsilon = 0.1;
  cfg.max_steps = 10;
  cfg.record = RecordPolicy::all();
  const Path p = run_stagewise(loss, reg, cfg);
  const Vector mid = interpolate_path(p, 0.25);
  const Vector want = 0.5 * (*p.records[2].state + *p.records[3].state);
  CHECK((mid - want).norm() < 1e-12);
  CHECK(interpolate_path(p, p.records[3].t) == *p.records[3].state);
  CHECK_THROWS_AS(interpolate_path(p, 5.0), RangeError);
}

TEST_CASE("step size diagnostic") {
  Path p;
  for (Index k = 0; k < 10; ++k) {
    PathRecord r;
    r.step = k;
    r.f = 10.0 - static_cast<double>(k);
    r.g = static_cast<double>(k);
    p.records.push_back(r);
  }
  CHECK(step_size_diagnostic(p).status == DiagnosticReport::Status::Clean);
  for (Index k = 5; k < 10; ++k) {
    p.records[static_cast<std::size_t>(k)].f = 5.0 + 0.5 * static_cast<double>(k % 2);
    p.records[static_cast<std::size_t>(k)].g = 5.0;
  }
  const DiagnosticReport r = step_size_diagnostic(p);
  CHECK(r.status == DiagnosticReport::Status::Alternating);
  REQUIRE(r.restart_step);
  CHECK(r.recommendation.find("halve") != std::string::npos);
  Path tiny;
  tiny.records.resize(2);
  CHECK_THROWS_AS(step_size_diagnostic(tiny), InputError);
}

TEST_CASE("null space initialization for least squares") {
  std::mt19937_64 rng(6);
  const Index n = 30;
  Matrix X = Matrix::Identity(n, n);
  const Vector y = testutil::gauss(rng, n);
  const LeastSquaresLoss loss({X, y});
  const QuadraticForm qf = QuadraticForm::difference_product(PenaltyMatrix::trend(n, 2));
  const Vector x0 = init_null_space(loss, qf);
  // projection onto the linear functions
  Matrix B(n, 2);
  for (Index i = 0; i < n; ++i) B(i, 0) = 1.0, B(i, 1) = static_cast<double>(i);
  const Vector fit = B * B.colPivHouseholderQr().solve(y);
  CHECK((x0 - fit).norm() < 1e-9);
}

TEST_CASE("effective Lagrange parameter and Lipschitz constant") {
  std::mt19937_64 rng(7);
  const auto loss = testutil::ls(rng, 12, 4);
  const L1Regularizer reg(4);
  StagewiseConfig cfg;
  cfg.epsilon = 0.05;
  cfg.max_steps = 20;
  cfg.record = RecordPolicy::all();
  const Path p = run_stagewise(loss, reg, cfg);
  const auto lag = effective_lagrange(p, loss, reg);
  REQUIRE(lag.size() == p.records.size());
  CHECK(lag[0].lambda == doctest::Approx(reg.dual_value(loss.gradient(Vector::Zero(4)))));
  const auto L = lipschitz_ls(loss.data().X, reg);
  CHECK(L.certified_upper);
  CHECK(L.value == doctest::Approx((loss.data().X.transpose() * loss.data().X).cwiseAbs().maxCoeff()));
}
