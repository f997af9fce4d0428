#pragma once

#include <random>

#include "stagewise/losses.hpp"
#include "stagewise/types.hpp"

namespace testutil {

using stagewise::Index;
using stagewise::Matrix;
using stagewise::Vector;

inline Vector gauss(std::mt19937_64& g, Index n) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(g);
  return v;
}

inline Matrix gauss(std::mt19937_64& g, Index r, Index c) {
  std::normal_distribution<double> d;
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = d(g);
  return m;
}

inline stagewise::LeastSquaresLoss ls(std::mt19937_64& g, Index n, Index p) {
  Matrix X = gauss(g, n, p);
  Vector y = gauss(g, n);
  return stagewise::LeastSquaresLoss({std::move(X), std::move(y)});
}

}  // namespace testutil
