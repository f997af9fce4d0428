#include "stagewise/penalty.hpp"

#include <algorithm>
#include <string>

namespace stagewise {

void PenaltyMatrix::push_row(std::span<const PenaltyEntry> entries) {
  bool nonzero = false;
  for (const auto& e : entries) {
    if (e.col < 0 || e.col >= p_) {
      throw InputError("penalty row references column " + std::to_string(e.col) +
                       " outside [0, " + std::to_string(p_) + ")");
    }
    if (!std::isfinite(e.value)) throw InputError("penalty entry is not finite");
    if (e.value != 0.0) nonzero = true;
  }
  if (!nonzero) throw InputError("penalty row " + std::to_string(rows()) + " is all zero");
  for (const auto& e : entries) {
    if (e.value != 0.0) entries_.push_back(e);
  }
  row_ptr_.push_back(entries_.size());
}

PenaltyMatrix PenaltyMatrix::chain(Index p) {
  if (p < 2) throw InputError("chain penalty needs p >= 2");
  PenaltyMatrix D(p, PenaltyTag::Chain);
  D.order_ = 1;
  for (Index i = 0; i + 1 < p; ++i) {
    const PenaltyEntry r[2] = {{i, -1.0}, {i + 1, 1.0}};
    D.push_row(r);
  }
  return D;
}

PenaltyMatrix PenaltyMatrix::grid2d(Index h, Index w) {
  if (h < 1 || w < 1 || h * w < 2) throw InputError("grid penalty needs at least two pixels");
  PenaltyMatrix D(h * w, PenaltyTag::Grid2d);
  D.h_ = h;
  D.w_ = w;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c + 1 < w; ++c) {
      const PenaltyEntry e[2] = {{r * w + c, -1.0}, {r * w + c + 1, 1.0}};
      D.push_row(e);
    }
  }
  for (Index r = 0; r + 1 < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const PenaltyEntry e[2] = {{r * w + c, -1.0}, {(r + 1) * w + c, 1.0}};
      D.push_row(e);
    }
  }
  return D;
}

PenaltyMatrix PenaltyMatrix::graph(Index p, std::span<const std::pair<Index, Index>> edges) {
  if (edges.empty()) throw InputError("graph penalty needs at least one edge");
  PenaltyMatrix D(p, PenaltyTag::Graph);
  for (const auto& [a, b] : edges) {
    if (a < 0 || b < 0 || a >= p || b >= p) {
      throw InputError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                       ") out of range for " + std::to_string(p) + " nodes");
    }
    if (a == b) throw InputError("self-loop edge at node " + std::to_string(a));
    const PenaltyEntry e[2] = {{a, -1.0}, {b, 1.0}};
    D.push_row(e);
  }
  return D;
}

PenaltyMatrix PenaltyMatrix::trend(Index p, int k) {
  if (k < 1 || k >= p) throw InputError("trend penalty needs 1 <= k < p");
  PenaltyMatrix D(p, k == 1 ? PenaltyTag::Chain : PenaltyTag::Trend);
  D.order_ = k;
  // (-1)^(k-j) C(k, j)
  std::vector<double> coef(static_cast<std::size_t>(k) + 1);
  double c = 1.0;
  for (int j = 0; j <= k; ++j) {
    coef[static_cast<std::size_t>(j)] = ((k - j) % 2 == 0 ? 1.0 : -1.0) * c;
    c = c * (k - j) / (j + 1);
  }
  std::vector<PenaltyEntry> r(static_cast<std::size_t>(k) + 1);
  for (Index i = 0; i + k < p; ++i) {
    for (int j = 0; j <= k; ++j) r[static_cast<std::size_t>(j)] = {i + j, coef[static_cast<std::size_t>(j)]};
    D.push_row(r);
  }
  return D;
}

PenaltyMatrix PenaltyMatrix::custom(Index p, const std::vector<std::vector<PenaltyEntry>>& rows) {
  if (p < 1) throw InputError("custom penalty needs p >= 1");
  if (rows.empty()) throw InputError("custom penalty needs at least one row");
  PenaltyMatrix D(p, PenaltyTag::Custom);
  for (const auto& r : rows) {
    auto sorted = r;
    std::sort(sorted.begin(), sorted.end(),
              [](const PenaltyEntry& a, const PenaltyEntry& b) { return a.col < b.col; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].col == sorted[i - 1].col) throw InputError("duplicate column in custom penalty row");
    }
    D.push_row(sorted);
  }
  return D;
}

std::span<const PenaltyEntry> PenaltyMatrix::row(Index i) const {
  const auto b = row_ptr_[static_cast<std::size_t>(i)];
  const auto e = row_ptr_[static_cast<std::size_t>(i) + 1];
  return {entries_.data() + b, e - b};
}

double PenaltyMatrix::row_norm_sq(Index i) const {
  double s = 0.0;
  for (const auto& e : row(i)) s += e.value * e.value;
  return s;
}

Vector PenaltyMatrix::apply(const Vector& beta) const {
  if (beta.size() != p_) throw InputError("penalty apply: length mismatch");
  Vector out(rows());
  for (Index i = 0; i < rows(); ++i) {
    double s = 0.0;
    for (const auto& e : row(i)) s += e.value * beta(e.col);
    out(i) = s;
  }
  return out;
}

void PenaltyMatrix::apply_transpose_add(double a, const Vector& u, Vector& out) const {
  if (u.size() != rows() || out.size() != p_) throw InputError("penalty transpose: length mismatch");
  for (Index i = 0; i < rows(); ++i) {
    const double ui = a * u(i);
    if (ui == 0.0) continue;
    for (const auto& e : row(i)) out(e.col) += e.value * ui;
  }
}

Vector PenaltyMatrix::apply_transpose(const Vector& u) const {
  Vector out = Vector::Zero(p_);
  apply_transpose_add(1.0, u, out);
  return out;
}

Matrix PenaltyMatrix::dense() const {
  Matrix M = Matrix::Zero(rows(), p_);
  for (Index i = 0; i < rows(); ++i) {
    for (const auto& e : row(i)) M(i, e.col) = e.value;
  }
  return M;
}

}  // namespace stagewise
