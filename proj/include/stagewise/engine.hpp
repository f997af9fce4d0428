#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stagewise/losses.hpp"
#include "stagewise/regularizers.hpp"
#include "stagewise/types.hpp"

namespace stagewise {

struct RecordPolicy {
  enum class Mode { All, EveryK, Endpoints };
  Mode mode = Mode::EveryK;
  Index k = 0;  // 0 picks max(1, max_steps / 500)

  static RecordPolicy all() { return {Mode::All, 1}; }
  static RecordPolicy every(Index k) { return {Mode::EveryK, k}; }
  static RecordPolicy endpoints() { return {Mode::Endpoints, 0}; }
  Index stride(Index max_steps) const;
};

enum class StopReason { MaxSteps, Stationary, GStall };
const char* stop_name(StopReason reason);

struct StagewiseConfig {
  double epsilon = 0.01;
  Index max_steps = 100;
  double alpha = 1.0;
  double t0 = 0.0;
  std::optional<Vector> x0;  // zero vector when absent
  std::optional<double> stop_g_stall;
  RecordPolicy record{};
  // Evaluate g(x^k) at every step; NaN is recorded otherwise.
  bool track_g = true;
  bool timing = true;

  void validate() const;
  /// 1 - alpha = eps / 10
  static double auto_alpha(double epsilon) { return 1.0 - epsilon / 10.0; }
};

struct PathRecord {
  Index step = 0;
  double t = 0.0;  // static parameter
  double g = 0.0;  // dynamic g(x^k)
  double f = 0.0;
  std::optional<Vector> state;
  double lambda = std::numeric_limits<double>::quiet_NaN();  // dual paths only
  std::int64_t wall_ns = 0;
};

struct Path {
  std::vector<PathRecord> records;
  std::string loss_kind;
  std::string reg_kind;
  std::uint64_t config_hash = 0;
  StopReason status = StopReason::MaxSteps;
  // Generalized lasso dual paths run from no regularization towards full
  // regularization, so t decreases along the records.
  bool regularizing = false;
  double epsilon = 0.0;
  double alpha = 1.0;
  Vector final_state;

  Index size() const { return static_cast<Index>(records.size()); }
  const PathRecord& back() const { return records.back(); }
  std::int64_t total_wall_ns() const;
};

Path run_stagewise(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg);
Path run_shrunken(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg);

/// Continuation config starting from the last state of `path`.
StagewiseConfig resume_config(const Path& path, StagewiseConfig cfg);

std::uint64_t config_hash(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg);

/// argmin of f over null(Q). Least squares and the Gaussian signal loss are
/// solved in closed form (minimum norm); GLMs by damped Newton.
Vector init_null_space(const Loss& loss, const QuadraticForm& qf);

struct DiagnosticReport {
  enum class Status { Clean, Nonmonotone, Alternating };
  Status status = Status::Clean;
  std::optional<Index> first_failure;
  Index alternating_run = 0;
  std::optional<Index> restart_step;
  double suggested_epsilon = 0.0;
  std::string recommendation;
};
const char* diagnostic_name(DiagnosticReport::Status status);

/// Finds where f stops decreasing or g stops increasing (slack 1e-12) and
/// measures how long the iterates then alternate.
DiagnosticReport step_size_diagnostic(const Path& path);

enum class PathAxis { Static, Dynamic };

/// Linear interpolation in t between the bracketing snapshots.
Vector interpolate_path(const Path& path, double t, PathAxis axis = PathAxis::Static);
/// Range of t covered by snapshots.
std::pair<double, double> snapshot_range(const Path& path, PathAxis axis = PathAxis::Static);

struct LagrangeEntry {
  Index step;
  double lambda;
  double t;
  double ratio;
};
std::vector<LagrangeEntry> effective_lagrange(const Path& path, const Loss& loss,
                                              const Regularizer& reg);

struct Theorem1Margin {
  Index step;
  double t;
  double bound;
  double excess;  // f(x^k) - (f_oracle - gap)
  double margin;  // bound - excess
};
/// Returns (oracle criterion value, certified gap) at t.
using OracleAtT = std::function<std::pair<double, double>(double t)>;
/// Empty for non-norm regularizers. Audits every record unless `steps` is given.
std::vector<Theorem1Margin> theorem1_check(const Path& path, const Regularizer& reg, double L,
                                           const OracleAtT& oracle,
                                           std::span<const Index> steps = {});

struct LipschitzConstant {
  double value;
  bool certified_upper;
};
/// L = max_u g*(X^T X u) / g(u) for l1 and all-l2 group regularizers.
LipschitzConstant lipschitz_ls(const Matrix& X, const Regularizer& reg);

}  // namespace stagewise
