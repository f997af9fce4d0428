#include "stagewise/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stagewise/kernels.hpp"

namespace stagewise {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* reg_name(RegKind kind) {
  switch (kind) {
    case RegKind::L1: return "l1";
    case RegKind::Group: return "group";
    case RegKind::Trace: return "trace";
    case RegKind::Quadratic: return "quadratic";
  }
  return "unknown";
}

const char* group_norm_name(GroupNorm kind) {
  switch (kind) {
    case GroupNorm::L2: return "l2";
    case GroupNorm::Linf: return "linf";
    case GroupNorm::L1: return "l1";
  }
  return "unknown";
}

// ---- partition

GroupPartition GroupPartition::equal(Index p, Index G, GroupNorm norm, bool sqrt_size_weights) {
  if (p < 1 || G < 1 || G > p) throw InputError("group partition: need 1 <= G <= p");
  GroupPartition part;
  Index start = 0;
  for (Index j = 0; j < G; ++j) {
    const Index size = p / G + (j < p % G ? 1 : 0);
    std::vector<Index> idx(static_cast<std::size_t>(size));
    for (Index k = 0; k < size; ++k) idx[static_cast<std::size_t>(k)] = start + k;
    start += size;
    part.groups.push_back(std::move(idx));
    part.weights.push_back(sqrt_size_weights ? std::sqrt(static_cast<double>(size)) : 1.0);
    part.norms.push_back(norm);
  }
  return part;
}

Index GroupPartition::dim() const {
  Index p = 0;
  for (const auto& g : groups) p += static_cast<Index>(g.size());
  return p;
}

void GroupPartition::validate(Index p) const {
  if (groups.empty()) throw InputError("group partition: no groups");
  if (weights.size() != groups.size() || norms.size() != groups.size()) {
    throw InputError("group partition: weights/norms length differs from group count");
  }
  std::vector<char> seen(static_cast<std::size_t>(p), 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InputError("group partition: empty group");
    for (Index i : g) {
      if (i < 0 || i >= p) throw InputError("group partition: index out of range");
      if (seen[static_cast<std::size_t>(i)]) throw InputError("group partition: groups overlap");
      seen[static_cast<std::size_t>(i)] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InputError("group partition: groups do not cover every coordinate");
  }
  bool positive = false;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("group partition: invalid weight");
    if (w > 0.0) positive = true;
  }
  if (!positive) throw InputError("group partition: all weights are zero");
}

// ---- base

Vector Regularizer::lmo(const Vector& grad, double eps) const {
  Vector d;
  lmo(grad, eps, d);
  return d;
}

void Regularizer::check(const Vector& x, const char* what) const {
  if (x.size() != dim()) {
    throw InputError(describe() + " " + what + ": expected length " + std::to_string(dim()) +
                     ", got " + std::to_string(x.size()));
  }
}

void Regularizer::check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("oracle step must be positive");
}

// ---- l1

L1Regularizer::L1Regularizer(Index p) : p_(p) {
  if (p < 1) throw InputError("l1 regularizer: dimension must be positive");
}

double L1Regularizer::value(const Vector& x) const {
  check(x, "value");
  return kernels::sum_abs(view(x));
}

double L1Regularizer::dual_value(const Vector& z) const {
  check(z, "dual");
  return kernels::max_abs(view(z));
}

void L1Regularizer::lmo(const Vector& grad, double eps, Vector& delta) const {
  check(grad, "lmo");
  check_eps(eps);
  delta.setZero(p_);
  const auto i = static_cast<Index>(kernels::argmax_abs(view(grad)));
  if (grad(i) != 0.0) delta(i) = -eps * sgn(grad(i));
}

// ---- groups

GroupRegularizer::GroupRegularizer(GroupPartition part) : part_(std::move(part)) {
  p_ = part_.dim();
  part_.validate(p_);
}

bool GroupRegularizer::all_l2() const {
  return std::all_of(part_.norms.begin(), part_.norms.end(),
                     [](GroupNorm n) { return n == GroupNorm::L2; });
}

std::string GroupRegularizer::describe() const {
  std::ostringstream os;
  os << "group(" << part_.count() << ")";
  return os.str();
}

double GroupRegularizer::block_value(Index j, const Vector& x) const {
  const auto& idx = part_.groups[static_cast<std::size_t>(j)];
  double s = 0.0;
  switch (part_.norms[static_cast<std::size_t>(j)]) {
    case GroupNorm::L2:
      for (Index i : idx) s += x(i) * x(i);
      return std::sqrt(s);
    case GroupNorm::Linf:
      for (Index i : idx) s = std::max(s, std::fabs(x(i)));
      return s;
    case GroupNorm::L1:
      for (Index i : idx) s += std::fabs(x(i));
      return s;
  }
  return s;
}

double GroupRegularizer::block_dual(Index j, const Vector& z) const {
  const auto& idx = part_.groups[static_cast<std::size_t>(j)];
  double s = 0.0;
  switch (part_.norms[static_cast<std::size_t>(j)]) {
    case GroupNorm::L2:
      for (Index i : idx) s += z(i) * z(i);
      return std::sqrt(s);
    case GroupNorm::Linf:  // dual is l1
      for (Index i : idx) s += std::fabs(z(i));
      return s;
    case GroupNorm::L1:  // dual is linf
      for (Index i : idx) s = std::max(s, std::fabs(z(i)));
      return s;
  }
  return s;
}

double GroupRegularizer::value(const Vector& x) const {
  check(x, "value");
  double v = 0.0;
  for (Index j = 0; j < part_.count(); ++j) {
    const double w = part_.weights[static_cast<std::size_t>(j)];
    if (w > 0.0) v += w * block_value(j, x);
  }
  return v;
}

double GroupRegularizer::dual_value(const Vector& z) const {
  check(z, "dual");
  double best = 0.0;
  for (Index j = 0; j < part_.count(); ++j) {
    const double h = block_dual(j, z);
    const double w = part_.weights[static_cast<std::size_t>(j)];
    if (w == 0.0) {
      if (h > 0.0) return kInf;
      continue;
    }
    best = std::max(best, h / w);
  }
  return best;
}

void GroupRegularizer::lmo(const Vector& grad, double eps, Vector& delta) const {
  check(grad, "lmo");
  check_eps(eps);
  delta.setZero(p_);
  Index best = -1;
  double best_score = 0.0, best_h = 0.0;
  for (Index j = 0; j < part_.count(); ++j) {
    const double h = block_dual(j, grad);
    if (h == 0.0) continue;
    const double w = part_.weights[static_cast<std::size_t>(j)];
    if (w == 0.0) {
      throw UnboundedDirectionError("group " + std::to_string(j) +
                                    " has zero weight but a nonzero gradient block");
    }
    const double score = h / w;
    if (score > best_score) {
      best = j;
      best_score = score;
      best_h = h;
    }
  }
  if (best < 0) return;
  const auto& idx = part_.groups[static_cast<std::size_t>(best)];
  const double w = part_.weights[static_cast<std::size_t>(best)];
  switch (part_.norms[static_cast<std::size_t>(best)]) {
    case GroupNorm::L2: {
      const double c = eps / (w * best_h);
      for (Index i : idx) delta(i) = -c * grad(i);
      break;
    }
    case GroupNorm::Linf: {
      const double c = eps / w;
      for (Index i : idx) delta(i) = -c * sgn(grad(i));
      break;
    }
    case GroupNorm::L1: {
      Index l = idx.front();
      for (Index i : idx) {
        if (std::fabs(grad(i)) > std::fabs(grad(l))) l = i;
      }
      delta(l) = -(eps / w) * sgn(grad(l));
      break;
    }
  }
}

// ---- trace

TraceRegularizer::TraceRegularizer(Index rows, Index cols, PowerMethodConfig pm)
    : m_(rows), n_(cols), pm_(pm) {
  if (rows < 1 || cols < 1) throw InputError("trace regularizer: dimensions must be positive");
}

std::string TraceRegularizer::describe() const {
  return "trace(" + std::to_string(m_) + "x" + std::to_string(n_) + ")";
}

Matrix TraceRegularizer::as_matrix(const Vector& x) const {
  check(x, "reshape");
  return Eigen::Map<const Matrix>(x.data(), m_, n_);
}

double TraceRegularizer::value(const Vector& x) const {
  const Matrix A = as_matrix(x);
  Eigen::JacobiSVD<Matrix> svd(A);
  return svd.singularValues().sum();
}

double TraceRegularizer::dual_value(const Vector& z) const {
  // dense decomposition: at exact solutions the top singular values of the
  // gradient tie and power iteration stalls
  Eigen::JacobiSVD<Matrix> svd(as_matrix(z));
  return svd.singularValues()(0);
}

SingularTriplet TraceRegularizer::lmo_factors(const Vector& grad) const {
  return leading_singular(as_matrix(grad), pm_);
}

void TraceRegularizer::lmo(const Vector& grad, double eps, Vector& delta) const {
  check_eps(eps);
  const SingularTriplet s = lmo_factors(grad);
  delta.setZero(m_ * n_);
  if (s.sigma == 0.0) return;
  Eigen::Map<Matrix> D(delta.data(), m_, n_);
  D.noalias() = (-eps * s.u) * s.v.transpose();
}

// ---- quadratic form

void QuadraticForm::check_symmetric_psd() const {
  if (Q_.rows() != Q_.cols() || Q_.rows() < 1) throw InputError("quadratic form: Q must be square");
  if (!Q_.allFinite()) throw InputError("quadratic form: non-finite entries");
  const double asym = (Q_ - Q_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(1.0, Q_.cwiseAbs().maxCoeff())) {
    throw InputError("quadratic form: Q is not symmetric");
  }
}

QuadraticForm QuadraticForm::dense(Matrix Q) {
  QuadraticForm qf;
  qf.structure_ = QuadStructure::Dense;
  qf.Q_ = std::move(Q);
  qf.check_symmetric_psd();
  const Index p = qf.Q_.rows();
  Eigen::SelfAdjointEigenSolver<Matrix> es(qf.Q_);
  if (es.info() != Eigen::Success) throw NumericError("quadratic form: eigendecomposition failed");
  const double norm_inf = qf.Q_.cwiseAbs().rowwise().sum().maxCoeff();
  const double thr = 1e-10 * norm_inf;
  const Vector& vals = es.eigenvalues();
  if (vals(0) < -thr) throw InputError("quadratic form: Q is not positive semidefinite");
  Index k = 0;
  while (k < p && vals(k) <= thr) ++k;
  if (k == p) throw InputError("quadratic form: Q is zero");
  qf.null_basis_ = es.eigenvectors().leftCols(k);
  if (k == 0) {
    qf.llt_.emplace(qf.Q_);
    if (qf.llt_->info() != Eigen::Success) throw NumericError("quadratic form: Cholesky failed");
  } else {
    qf.range_vecs_ = es.eigenvectors().rightCols(p - k);
    qf.range_inv_vals_ = vals.tail(p - k).cwiseInverse();
  }
  return qf;
}

QuadraticForm QuadraticForm::banded(Matrix Q, Index bandwidth) {
  QuadraticForm qf;
  qf.structure_ = QuadStructure::Banded;
  qf.Q_ = std::move(Q);
  qf.check_symmetric_psd();
  if (BandedCholesky::detect_bandwidth(qf.Q_) > bandwidth) {
    throw InputError("quadratic form: Q has entries outside the declared band");
  }
  qf.band_.emplace(qf.Q_, bandwidth);
  qf.null_basis_ = Matrix(qf.Q_.rows(), 0);
  return qf;
}

QuadraticForm QuadraticForm::difference_product(PenaltyMatrix D) {
  QuadraticForm qf;
  qf.structure_ = QuadStructure::DifferenceProduct;
  const Matrix Dd = D.dense();
  const Index m = Dd.rows(), p = Dd.cols();
  if (m >= p) throw InputError("quadratic form: difference factor must have fewer rows than columns");
  qf.Q_ = Dd.transpose() * Dd;
  const Matrix DDt = Dd * Dd.transpose();
  try {
    qf.ddt_ = BandedCholesky::from_dense(DDt);
  } catch (const NumericError&) {
    throw InputError("quadratic form: difference factor is not of full row rank");
  }
  // null(D) has dimension p - m for full row rank D
  Eigen::JacobiSVD<Matrix> svd(Dd, Eigen::ComputeFullV);
  qf.null_basis_ = svd.matrixV().rightCols(p - m);
  qf.D_.emplace(std::move(D));
  return qf;
}

double QuadraticForm::quad(const Vector& x) const {
  if (x.size() != dim()) throw InputError("quadratic form: length mismatch");
  if (D_) {
    const Vector d = D_->apply(x);
    return d.squaredNorm();
  }
  return x.dot(Q_ * x);
}

QuadraticForm::Solve QuadraticForm::solve(const Vector& g) const {
  if (g.size() != dim()) throw InputError("quadratic form: length mismatch");
  Solve s;
  switch (structure_) {
    case QuadStructure::Dense:
      if (llt_) {
        s.pinv_g = llt_->solve(g);
        s.projected_norm = g.norm();
      } else {
        const Vector c = range_vecs_.transpose() * g;
        s.pinv_g = range_vecs_ * c.cwiseProduct(range_inv_vals_);
        s.projected_norm = c.norm();
      }
      break;
    case QuadStructure::Banded:
      s.pinv_g = band_->solve(g);
      s.projected_norm = g.norm();
      break;
    case QuadStructure::DifferenceProduct: {
      // w = (D D^T)^{-1} D g,  Q^+ g = D^T (D D^T)^{-1} w,  g^T Q^+ g = ||w||^2
      const Vector w = ddt_->solve(D_->apply(g));
      s.projected_norm = D_->apply_transpose(w).norm();
      s.pinv_g = D_->apply_transpose(ddt_->solve(w));
      s.gqg = w.squaredNorm();
      return s;
    }
  }
  s.gqg = g.dot(s.pinv_g);
  return s;
}

Vector QuadraticForm::pinv_apply(const Vector& g) const { return solve(g).pinv_g; }

Vector QuadraticForm::project_row(const Vector& g) const {
  if (g.size() != dim()) throw InputError("quadratic form: length mismatch");
  if (nullity() == 0) return g;
  if (D_) return D_->apply_transpose(ddt_->solve(D_->apply(g)));
  return range_vecs_ * (range_vecs_.transpose() * g);
}

// ---- quadratic regularizer

QuadraticRegularizer::QuadraticRegularizer(QuadraticForm qf) : qf_(std::move(qf)) {}

std::string QuadraticRegularizer::describe() const {
  switch (qf_.structure()) {
    case QuadStructure::Dense: return "quadratic(dense)";
    case QuadStructure::Banded: return "quadratic(banded)";
    case QuadStructure::DifferenceProduct: return "quadratic(difference_product)";
  }
  return "quadratic";
}

double QuadraticRegularizer::value(const Vector& x) const {
  check(x, "value");
  return qf_.quad(x);
}

double QuadraticRegularizer::dual_value(const Vector& z) const {
  check(z, "dual");
  return std::sqrt(std::max(0.0, qf_.solve(z).gqg));
}

void QuadraticRegularizer::lmo(const Vector& grad, double eps, Vector& delta) const {
  check(grad, "lmo");
  check_eps(eps);
  const double gnorm = grad.norm();
  delta.setZero(dim());
  if (gnorm == 0.0) return;
  const auto s = qf_.solve(grad);
  if (s.projected_norm <= 1e-12 * gnorm || !(s.gqg > 0.0)) return;
  delta = (-std::sqrt(eps) / std::sqrt(s.gqg)) * s.pinv_g;
}

}  // namespace stagewise
