#include "stagewise/banded.hpp"

#include <algorithm>
#include <cmath>

namespace stagewise {

BandedCholesky::BandedCholesky(const Matrix& A, Index bandwidth)
    : n_(A.rows()), bw_(std::max<Index>(0, std::min<Index>(bandwidth, A.rows() - 1))) {
  if (A.rows() != A.cols()) throw InputError("banded Cholesky: matrix must be square");
  band_.assign(static_cast<std::size_t>(n_ * (bw_ + 1)), 0.0);
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n_; ++j) {
    double diag = A(j, j);
    for (Index k = std::max<Index>(0, j - bw_); k < j; ++k) {
      const double l = at(j, j - k);
      diag -= l * l;
    }
    if (!(diag > 1e-14 * scale)) {
      throw NumericError("banded Cholesky: matrix is not positive definite (pivot " +
                         std::to_string(j) + ")");
    }
    const double ljj = std::sqrt(diag);
    at(j, 0) = ljj;
    for (Index i = j + 1; i <= std::min(n_ - 1, j + bw_); ++i) {
      double s = A(i, j);
      for (Index k = std::max<Index>(0, i - bw_); k < j; ++k) s -= at(i, i - k) * at(j, j - k);
      at(i, i - j) = s / ljj;
    }
  }
}

Index BandedCholesky::detect_bandwidth(const Matrix& A, double threshold) {
  Index bw = 0;
  for (Index j = 0; j < A.cols(); ++j) {
    for (Index i = j + 1; i < A.rows(); ++i) {
      if (std::fabs(A(i, j)) > threshold) bw = std::max(bw, i - j);
    }
  }
  return bw;
}

BandedCholesky BandedCholesky::from_dense(const Matrix& A) {
  return BandedCholesky(A, detect_bandwidth(A));
}

Vector BandedCholesky::solve(const Vector& b) const {
  if (b.size() != n_) throw InputError("banded Cholesky: right-hand side has wrong length");
  Vector y(n_);
  for (Index i = 0; i < n_; ++i) {
    double s = b(i);
    for (Index k = std::max<Index>(0, i - bw_); k < i; ++k) s -= at(i, i - k) * y(k);
    y(i) = s / at(i, 0);
  }
  Vector x(n_);
  for (Index i = n_ - 1; i >= 0; --i) {
    double s = y(i);
    for (Index k = i + 1; k <= std::min(n_ - 1, i + bw_); ++k) s -= at(k, k - i) * x(k);
    x(i) = s / at(i, 0);
  }
  return x;
}

}  // namespace stagewise
