#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stagewise/types.hpp"

namespace stagewise {

struct Dataset {
  Matrix X;
  Vector y;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  void validate() const;
};

struct Observation {
  Index row;
  Index col;
  double value;
};

/// Partially observed m x n matrix. States over such a matrix are stored as
/// flat column-major vectors of length m*n.
class ObservedMatrix {
 public:
  ObservedMatrix(Index rows, Index cols, std::vector<Observation> entries);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<Observation>& entries() const { return entries_; }
  /// Column-major linear index of each observation, ascending.
  const std::vector<Index>& support() const { return support_; }
  Index linear(Index i, Index j) const { return j * rows_ + i; }

 private:
  Index rows_, cols_;
  std::vector<Observation> entries_;
  std::vector<Index> support_;
};

enum class LossKind { LeastSquares, Logistic, Poisson, MatrixCompletion, GaussianSignal };
enum class GlmFamily { Logistic, Poisson };

const char* loss_name(LossKind kind);

/// Differentiable convex loss over a flat parameter vector.
class Loss {
 public:
  virtual ~Loss() = default;
  virtual LossKind kind() const = 0;
  virtual Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// Writes the gradient into `grad` (resized as needed) and returns the value.
  virtual double value_grad(const Vector& x, Vector& grad) const = 0;

  Vector gradient(const Vector& x) const;

 protected:
  void check_dim(const Vector& x) const;
};

class LeastSquaresLoss final : public Loss {
 public:
  explicit LeastSquaresLoss(Dataset data);
  LossKind kind() const override { return LossKind::LeastSquares; }
  Index dim() const override { return data_.p(); }
  double value(const Vector& beta) const override;
  double value_grad(const Vector& beta, Vector& grad) const override;
  const Dataset& data() const { return data_; }

 private:
  Dataset data_;
};

/// Negative log-likelihood of a logistic or Poisson GLM with canonical link,
/// dropping terms that do not depend on beta (log y! for Poisson).
class GlmLoss final : public Loss {
 public:
  static constexpr double kEtaClamp = 30.0;

  GlmLoss(Dataset data, GlmFamily family);
  LossKind kind() const override;
  Index dim() const override { return data_.p(); }
  double value(const Vector& beta) const override;
  double value_grad(const Vector& beta, Vector& grad) const override;
  GlmFamily family() const { return family_; }
  const Dataset& data() const { return data_; }
  /// Mean response for each row at the given coefficients.
  Vector mean(const Vector& beta) const;

 private:
  Dataset data_;
  GlmFamily family_;
};

/// 1/2 sum over observed (i, j) of (Y_ij - B_ij)^2.
class MatrixCompletionLoss final : public Loss {
 public:
  explicit MatrixCompletionLoss(ObservedMatrix obs);
  LossKind kind() const override { return LossKind::MatrixCompletion; }
  Index dim() const override { return obs_.rows() * obs_.cols(); }
  double value(const Vector& b) const override;
  double value_grad(const Vector& b, Vector& grad) const override;
  const ObservedMatrix& observed() const { return obs_; }

 private:
  ObservedMatrix obs_;
};

/// 1/2 ||y - beta||^2, the only loss with a conjugate gradient wired in.
class GaussianSignalLoss final : public Loss {
 public:
  explicit GaussianSignalLoss(Vector y);
  LossKind kind() const override { return LossKind::GaussianSignal; }
  Index dim() const override { return y_.size(); }
  double value(const Vector& beta) const override;
  double value_grad(const Vector& beta, Vector& grad) const override;
  /// z -> grad f*(z) = y + z
  Vector conjugate_gradient(const Vector& z) const;
  const Vector& y() const { return y_; }

 private:
  Vector y_;
};

/// Central-difference gradient, used by the test suites.
Vector finite_difference_gradient(const Loss& loss, const Vector& x, double h = 1e-5);

}  // namespace stagewise
