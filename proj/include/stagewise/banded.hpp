#pragma once

#include <vector>

#include "stagewise/types.hpp"

namespace stagewise {

/// Cholesky factor of a symmetric positive definite banded matrix.
/// Factorization is O(p d^2) and each solve O(p d) for bandwidth d.
class BandedCholesky {
 public:
  BandedCholesky() = default;

  /// Factors the band of `A` (entries farther than `bandwidth` from the
  /// diagonal are ignored). Throws NumericError if A is not numerically PD.
  BandedCholesky(const Matrix& A, Index bandwidth);

  /// Detects the bandwidth of `A` from its nonzero pattern.
  static BandedCholesky from_dense(const Matrix& A);
  static Index detect_bandwidth(const Matrix& A, double threshold = 0.0);

  Vector solve(const Vector& b) const;
  Index size() const { return n_; }
  Index bandwidth() const { return bw_; }

 private:
  double& at(Index i, Index d) { return band_[static_cast<std::size_t>(i * (bw_ + 1) + d)]; }
  double at(Index i, Index d) const { return band_[static_cast<std::size_t>(i * (bw_ + 1) + d)]; }

  Index n_ = 0;
  Index bw_ = 0;
  // Row i stores L(i, i - d) at position d, d = 0..bw.
  std::vector<double> band_;
};

}  // namespace stagewise
