#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stagewise/banded.hpp"
#include "stagewise/penalty.hpp"
#include "stagewise/power_method.hpp"
#include "stagewise/types.hpp"

namespace stagewise {

enum class RegKind { L1, Group, Trace, Quadratic };
enum class GroupNorm { L2, Linf, L1 };

const char* reg_name(RegKind kind);
const char* group_norm_name(GroupNorm kind);

struct GroupPartition {
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;
  std::vector<GroupNorm> norms;

  /// G contiguous groups of (nearly) equal size over {0..p-1}. Weights are 1,
  /// or sqrt(group size) when `sqrt_size_weights` is set.
  static GroupPartition equal(Index p, Index G, GroupNorm norm = GroupNorm::L2,
                              bool sqrt_size_weights = false);

  Index dim() const;
  Index count() const { return static_cast<Index>(groups.size()); }
  /// Throws InputError unless the groups partition {0..p-1}, weights are
  /// nonnegative with at least one positive, and sizes agree.
  void validate(Index p) const;
};

/// Convex regularizer g with its dual g* and the epsilon-scaled linear
/// minimization oracle  lmo(grad, eps) in argmin_{g(z) <= eps} <grad, z>.
class Regularizer {
 public:
  virtual ~Regularizer() = default;
  virtual RegKind kind() const = 0;
  virtual Index dim() const = 0;
  /// False for the quadratic kind, whose g is not a norm.
  virtual bool is_norm() const { return true; }
  virtual double value(const Vector& x) const = 0;
  virtual double dual_value(const Vector& z) const = 0;
  virtual void lmo(const Vector& grad, double eps, Vector& delta) const = 0;
  virtual std::string describe() const = 0;

  Vector lmo(const Vector& grad, double eps) const;

 protected:
  void check(const Vector& x, const char* what) const;
  static void check_eps(double eps);
};

class L1Regularizer final : public Regularizer {
 public:
  explicit L1Regularizer(Index p);
  RegKind kind() const override { return RegKind::L1; }
  Index dim() const override { return p_; }
  double value(const Vector& x) const override;
  double dual_value(const Vector& z) const override;
  using Regularizer::lmo;
  void lmo(const Vector& grad, double eps, Vector& delta) const override;
  std::string describe() const override { return "l1"; }

 private:
  Index p_;
};

class GroupRegularizer final : public Regularizer {
 public:
  explicit GroupRegularizer(GroupPartition part);
  RegKind kind() const override { return RegKind::Group; }
  Index dim() const override { return p_; }
  double value(const Vector& x) const override;
  /// max_j h_j*(z_Ij) / w_j; +infinity when a zero-weight group meets a
  /// nonzero block.
  double dual_value(const Vector& z) const override;
  using Regularizer::lmo;
  void lmo(const Vector& grad, double eps, Vector& delta) const override;
  std::string describe() const override;

  const GroupPartition& partition() const { return part_; }
  bool all_l2() const;
  /// h_j*(z_Ij), unweighted.
  double block_dual(Index j, const Vector& z) const;
  double block_value(Index j, const Vector& x) const;

 private:
  GroupPartition part_;
  Index p_;
};

/// Nuclear norm over m x n matrices stored column-major.
class TraceRegularizer final : public Regularizer {
 public:
  TraceRegularizer(Index rows, Index cols, PowerMethodConfig pm = {});
  RegKind kind() const override { return RegKind::Trace; }
  Index dim() const override { return m_ * n_; }
  double value(const Vector& x) const override;
  double dual_value(const Vector& z) const override;
  using Regularizer::lmo;
  void lmo(const Vector& grad, double eps, Vector& delta) const override;
  std::string describe() const override;

  /// The oracle output as a scaled outer product -eps * u v^T.
  SingularTriplet lmo_factors(const Vector& grad) const;
  Index rows() const { return m_; }
  Index cols() const { return n_; }
  const PowerMethodConfig& power_config() const { return pm_; }
  Matrix as_matrix(const Vector& x) const;

 private:
  Index m_, n_;
  PowerMethodConfig pm_;
};

enum class QuadStructure { Dense, Banded, DifferenceProduct };

/// Positive semidefinite Q with a factorization built once at construction.
class QuadraticForm {
 public:
  static QuadraticForm dense(Matrix Q);
  /// Q positive definite with the given bandwidth.
  static QuadraticForm banded(Matrix Q, Index bandwidth);
  /// Q = D^T D for D of full row rank.
  static QuadraticForm difference_product(PenaltyMatrix D);

  QuadStructure structure() const { return structure_; }
  Index dim() const { return Q_.rows(); }
  const Matrix& matrix() const { return Q_; }
  const PenaltyMatrix* factor() const { return D_ ? &*D_ : nullptr; }

  double quad(const Vector& x) const;
  /// Q^+ g
  Vector pinv_apply(const Vector& g) const;
  /// Orthogonal projection onto row(Q).
  Vector project_row(const Vector& g) const;
  /// Orthonormal basis of null(Q), p x k (k may be 0).
  const Matrix& null_basis() const { return null_basis_; }
  Index nullity() const { return null_basis_.cols(); }

  /// Q^+ g and g^T Q^+ g, with the row-space projection of g.
  struct Solve {
    Vector pinv_g;
    double gqg;
    double projected_norm;
  };
  Solve solve(const Vector& g) const;

 private:
  QuadraticForm() = default;
  void check_symmetric_psd() const;

  QuadStructure structure_ = QuadStructure::Dense;
  Matrix Q_;
  Matrix null_basis_;
  // dense
  std::optional<Eigen::LLT<Matrix>> llt_;
  Matrix range_vecs_;
  Vector range_inv_vals_;
  // banded
  std::optional<BandedCholesky> band_;
  // difference product: D and a factor of D D^T
  std::optional<PenaltyMatrix> D_;
  std::optional<BandedCholesky> ddt_;
};

/// g(x) = x^T Q x with the oracle -sqrt(eps) Q^+ g / sqrt(g^T Q^+ g).
class QuadraticRegularizer final : public Regularizer {
 public:
  explicit QuadraticRegularizer(QuadraticForm qf);
  RegKind kind() const override { return RegKind::Quadratic; }
  Index dim() const override { return qf_.dim(); }
  bool is_norm() const override { return false; }
  double value(const Vector& x) const override;
  /// sqrt(z^T Q^+ z), diagnostic only.
  double dual_value(const Vector& z) const override;
  using Regularizer::lmo;
  void lmo(const Vector& grad, double eps, Vector& delta) const override;
  std::string describe() const override;

  const QuadraticForm& form() const { return qf_; }

 private:
  QuadraticForm qf_;
};

}  // namespace stagewise
