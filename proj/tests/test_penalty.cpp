#include <utility>

#include "doctest.h"
#include "stagewise/banded.hpp"
#include "stagewise/penalty.hpp"

using namespace stagewise;

TEST_CASE("chain and trend operators") {
  const PenaltyMatrix D = PenaltyMatrix::chain(4);
  CHECK(D.rows() == 3);
  Vector b(4);
  b << 1, 1, 2, 4;
  const Vector d = D.apply(b);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == 1.0);
  CHECK(d(2) == 2.0);
  const PenaltyMatrix T = PenaltyMatrix::trend(5, 2);
  CHECK(T.rows() == 3);
  Vector line = Vector::LinSpaced(5, 0.0, 4.0);
  CHECK(T.apply(line).norm() == 0.0);
  Matrix expect(3, 5);
  expect << 1, -2, 1, 0, 0, 0, 1, -2, 1, 0, 0, 0, 1, -2, 1;
  CHECK((T.dense() - expect).norm() == 0.0);
}

TEST_CASE("grid2d edge count and transpose") {
  const PenaltyMatrix D = PenaltyMatrix::grid2d(3, 4);
  CHECK(D.rows() == 3 * 3 + 2 * 4);
  const Vector u = Vector::LinSpaced(D.rows(), -1.0, 1.0);
  CHECK((D.apply_transpose(u) - D.dense().transpose() * u).norm() < 1e-14);
}

TEST_CASE("graph builder validates edges") {
  std::vector<std::pair<Index, Index>> ok{{0, 1}, {1, 2}};
  CHECK(PenaltyMatrix::graph(3, ok).rows() == 2);
  std::vector<std::pair<Index, Index>> loop{{1, 1}};
  CHECK_THROWS_AS(PenaltyMatrix::graph(3, loop), InputError);
  std::vector<std::pair<Index, Index>> out{{0, 5}};
  CHECK_THROWS_AS(PenaltyMatrix::graph(3, out), InputError);
}

TEST_CASE("banded Cholesky solves and rejects indefinite input") {
  Matrix A = Matrix::Zero(6, 6);
  for (Index i = 0; i < 6; ++i) {
    A(i, i) = 6.0;
    if (i + 1 < 6) A(i, i + 1) = A(i + 1, i) = -2.0;
    if (i + 2 < 6) A(i, i + 2) = A(i + 2, i) = 1.0;
  }
  CHECK(BandedCholesky::detect_bandwidth(A) == 2);
  const BandedCholesky c = BandedCholesky::from_dense(A);
  const Vector b = Vector::LinSpaced(6, 1.0, 6.0);
  CHECK((A * c.solve(b) - b).norm() < 1e-12);
  Matrix N = -Matrix::Identity(3, 3);
  CHECK_THROWS_AS(BandedCholesky::from_dense(N), NumericError);
}
