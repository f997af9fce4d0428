#include <random>

#include "doctest.h"
#include "stagewise/oracle.hpp"
#include "stagewise/regularizers.hpp"
#include "util.hpp"

using namespace stagewise;

TEST_CASE("l1 oracle picks the smallest index among ties") {
  const L1Regularizer reg(4);
  Vector g(4);
  g << 1.0, -3.0, 3.0, 0.5;
  const Vector d = reg.lmo(g, 0.1);
  CHECK(d(1) == doctest::Approx(0.1));
  CHECK(d.cwiseAbs().sum() == doctest::Approx(0.1));
  CHECK(reg.lmo(Vector::Zero(4), 0.1).norm() == 0.0);
  CHECK_THROWS_AS(reg.lmo(g, -1.0), InputError);
}

TEST_CASE("group oracles for each block norm") {
  SUBCASE("l2") {
    GroupPartition part{{{0, 1}, {2}}, {1.0, 1.0}, {GroupNorm::L2, GroupNorm::L2}};
    const GroupRegularizer reg(part);
    Vector g(3);
    g << 3.0, 4.0, 1.0;
    const Vector d = reg.lmo(g, 1.0);
    CHECK(d(0) == doctest::Approx(-0.6));
    CHECK(d(1) == doctest::Approx(-0.8));
    CHECK(d(2) == 0.0);
  }
  SUBCASE("linf") {
    GroupPartition part{{{0, 1}, {2}}, {1.0, 1.0}, {GroupNorm::Linf, GroupNorm::Linf}};
    const GroupRegularizer reg(part);
    Vector g(3);
    g << 1.0, -2.0, 2.5;
    const Vector d = reg.lmo(g, 0.5);
    CHECK(d(0) == doctest::Approx(-0.5));
    CHECK(d(1) == doctest::Approx(0.5));
    CHECK(d(2) == 0.0);
  }
  SUBCASE("zero weight with nonzero gradient is unbounded") {
    GroupPartition part{{{0}, {1}}, {0.0, 1.0}, {GroupNorm::L2, GroupNorm::L2}};
    const GroupRegularizer reg(part);
    Vector g(2);
    g << 1.0, 1.0;
    CHECK_THROWS_AS(reg.lmo(g, 1.0), UnboundedDirectionError);
  }
  SUBCASE("partition validation") {
    GroupPartition bad{{{0}, {0}}, {1.0, 1.0}, {GroupNorm::L2, GroupNorm::L2}};
    CHECK_THROWS_AS(GroupRegularizer{bad}, InputError);
  }
}

TEST_CASE("trace oracle on a diagonal gradient") {
  const TraceRegularizer reg(2, 2);
  Vector g(4);
  g << 2.0, 0.0, 0.0, 1.0;
  const Vector d = reg.lmo(g, 0.5);
  CHECK(d(0) == doctest::Approx(-0.5).epsilon(1e-8));
  CHECK(std::abs(d(1)) < 1e-8);
  CHECK(std::abs(d(2)) < 1e-8);
  CHECK(std::abs(d(3)) < 1e-8);
  CHECK(reg.value(d) == doctest::Approx(0.5));
}

TEST_CASE("oracles are active, homogeneous and beat random feasible points") {
  std::mt19937_64 rng(9);
  std::vector<std::unique_ptr<Regularizer>> regs;
  regs.push_back(std::make_unique<L1Regularizer>(6));
  regs.push_back(std::make_unique<GroupRegularizer>(GroupPartition::equal(6, 3)));
  regs.push_back(std::make_unique<GroupRegularizer>(GroupPartition::equal(6, 2, GroupNorm::Linf)));
  regs.push_back(std::make_unique<TraceRegularizer>(3, 2));
  for (const auto& reg : regs) {
    for (int trial = 0; trial < 5; ++trial) {
      const Vector g = testutil::gauss(rng, 6);
      const Vector d = reg->lmo(g, 0.3);
      CHECK(reg->value(d) == doctest::Approx(0.3).epsilon(1e-9));
      CHECK(g.dot(d) == doctest::Approx(-0.3 * reg->dual_value(g)).epsilon(1e-8));
      CHECK((reg->lmo(g, 0.6) - 2.0 * d).norm() < 1e-9);
      const LmoCheck chk = brute_lmo_check(*reg, g, 0.3, 500, 3 + trial);
      CHECK(chk.ok);
      CHECK(chk.worst_margin >= -1e-9);
    }
  }
}

TEST_CASE("Hoelder inequality for value and dual value") {
  std::mt19937_64 rng(4);
  const GroupRegularizer reg(GroupPartition::equal(8, 4, GroupNorm::L1));
  for (int i = 0; i < 20; ++i) {
    const Vector x = testutil::gauss(rng, 8), z = testutil::gauss(rng, 8);
    CHECK(std::abs(x.dot(z)) <= reg.value(x) * reg.dual_value(z) + 1e-12);
  }
}

TEST_CASE("quadratic form pseudoinverse identities") {
  std::mt19937_64 rng(8);
  const PenaltyMatrix D = PenaltyMatrix::trend(12, 2);
  const QuadraticForm qd = QuadraticForm::difference_product(D);
  const QuadraticForm qf = QuadraticForm::dense(D.dense().transpose() * D.dense());
  CHECK(qd.nullity() == 2);
  CHECK(qf.nullity() == 2);
  const Matrix Q = qf.matrix();
  for (int i = 0; i < 5; ++i) {
    const Vector g = testutil::gauss(rng, 12);
    const Vector a = qd.pinv_apply(g), b = qf.pinv_apply(g);
    CHECK((a - b).norm() < 1e-8 * std::max(1.0, a.norm()));
    // Q Q^+ g is the projection onto row(Q)
    CHECK((Q * a - qd.project_row(g)).norm() < 1e-8 * std::max(1.0, g.norm()));
    CHECK((qd.null_basis().transpose() * a).norm() < 1e-8 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("quadratic oracle stays in the row space and spends eps") {
  std::mt19937_64 rng(2);
  const QuadraticRegularizer reg(QuadraticForm::difference_product(PenaltyMatrix::trend(10, 2)));
  const Vector g = testutil::gauss(rng, 10);
  const Vector d = reg.lmo(g, 0.04);
  CHECK(reg.value(d) == doctest::Approx(0.04).epsilon(1e-9));
  CHECK((reg.form().null_basis().transpose() * d).norm() < 1e-10);
  CHECK(g.dot(d) < 0.0);
  // a gradient in the null space gives no move
  const Vector n = reg.form().null_basis().col(0);
  CHECK(reg.lmo(n, 0.04).norm() == 0.0);
}

TEST_CASE("dense quadratic form rejects bad input") {
  Matrix Q(2, 2);
  Q << 1, 2, 0, 1;
  CHECK_THROWS_AS(QuadraticForm::dense(Q), InputError);
  Q << 1, 0, 0, -1;
  CHECK_THROWS_AS(QuadraticForm::dense(Q), InputError);
  CHECK_THROWS_AS(QuadraticForm::dense(Matrix::Zero(2, 2)), InputError);
}

TEST_CASE("banded quadratic form matches dense") {
  const Index p = 9;
  Matrix Q = Matrix::Zero(p, p);
  for (Index i = 0; i < p; ++i) {
    Q(i, i) = 4.0;
    if (i + 1 < p) Q(i, i + 1) = Q(i + 1, i) = -1.0;
  }
  const QuadraticForm b = QuadraticForm::banded(Q, 1), d = QuadraticForm::dense(Q);
  const Vector g = Vector::LinSpaced(p, -1.0, 2.0);
  CHECK((b.pinv_apply(g) - d.pinv_apply(g)).norm() < 1e-12);
  CHECK(b.solve(g).gqg == doctest::Approx(d.solve(g).gqg));
}
