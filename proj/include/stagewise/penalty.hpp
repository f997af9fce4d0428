#pragma once

#include <span>
#include <utility>
#include <vector>

#include "stagewise/types.hpp"

namespace stagewise {

struct PenaltyEntry {
  Index col;
  double value;
};

enum class PenaltyTag { Chain, Grid2d, Graph, Trend, Custom };

/// Sparse row-major difference / incidence matrix D (m x p).
class PenaltyMatrix {
 public:
  PenaltyMatrix() = default;

  /// (p-1) x p first differences: row i is -e_i + e_{i+1}.
  static PenaltyMatrix chain(Index p);
  /// Horizontal then vertical neighbour differences on an h x w image stored
  /// row-major (pixel (r, c) has index r*w + c).
  static PenaltyMatrix grid2d(Index h, Index w);
  /// One row per edge {a, b}: -1 at a, +1 at b.
  static PenaltyMatrix graph(Index p, std::span<const std::pair<Index, Index>> edges);
  /// Order-k discrete differences, (p-k) x p.
  static PenaltyMatrix trend(Index p, int k);
  static PenaltyMatrix custom(Index p, const std::vector<std::vector<PenaltyEntry>>& rows);

  Index rows() const { return static_cast<Index>(row_ptr_.size()) - 1; }
  Index cols() const { return p_; }
  PenaltyTag tag() const { return tag_; }
  /// Difference order for chain (1) and trend (k); 0 otherwise.
  int order() const { return order_; }
  Index height() const { return h_; }
  Index width() const { return w_; }
  std::size_t nonzeros() const { return entries_.size(); }

  std::span<const PenaltyEntry> row(Index i) const;
  double row_norm_sq(Index i) const;

  Vector apply(const Vector& beta) const;
  Vector apply_transpose(const Vector& u) const;
  /// out += a * D^T u, rows visited in order.
  void apply_transpose_add(double a, const Vector& u, Vector& out) const;
  Matrix dense() const;

 private:
  PenaltyMatrix(Index p, PenaltyTag tag) : p_(p), tag_(tag) {}
  void push_row(std::span<const PenaltyEntry> entries);

  Index p_ = 0;
  PenaltyTag tag_ = PenaltyTag::Custom;
  int order_ = 0;
  Index h_ = 0, w_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<PenaltyEntry> entries_;
};

}  // namespace stagewise
