#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stagewise/engine.hpp"
#include "stagewise/io.hpp"
#include "stagewise/losses.hpp"
#include "stagewise/oracle.hpp"
#include "stagewise/penalty.hpp"
#include "stagewise/regularizers.hpp"

namespace stagewise {

enum class Scenario {
  GroupUncorr,
  GroupCorr,
  MatComp,
  Image2d,
  RidgeLogisticUncorr,
  RidgeLogisticCorr,
  MonotoneLasso,
  ShrunkenLasso,
  Fused1d,
};

const char* scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(const std::string& name);
std::vector<Scenario> all_scenarios();

enum class Metric { MseToTruth, TestMisclass };

struct ExperimentSpec {
  Scenario scenario = Scenario::GroupUncorr;
  std::uint64_t seed = 1;
  Index reps = 1;

  // scale parameters; unused ones are ignored by a scenario
  Index n = 50;
  Index p = 100;
  Index groups = 10;
  Index active_groups = 2;
  Index nonzeros = 5;
  Index rank = 3;
  Index height = 20;
  Index width = 20;
  Index segments = 5;
  double noise = 2.0;
  double rho = 0.0;
  double observed_fraction = 0.6;
  double level = 3.0;  // foreground level of the two-level image
  std::optional<std::filesystem::path> image;  // PGM truth for image2d

  // engine
  std::vector<double> epsilons{0.02};
  Index steps = 500;  // for the first epsilon; others cover the same t range
  std::optional<double> alpha;  // shrunken runs; 1 - eps/10 when unset
  Index power_max_iter = 1000;
  RecordPolicy record = RecordPolicy::all();

  // oracle
  std::vector<double> t_grid;  // empty: evenly spaced up to the stagewise range
  Index grid_points = 40;
  double gap_tol = 1e-8;
  Index fw_cap = 0;  // > 0 adds Frank-Wolfe capped at this many iterations
  bool run_oracle = true;

  bool timing = true;
  Index threads = 1;

  static ExperimentSpec defaults(Scenario s);
  void validate() const;
  Metric metric() const;
};

/// Deterministic 64-bit seed for one random stream of one repetition.
std::uint64_t stream_seed(std::uint64_t seed, Index rep, std::uint32_t component);

struct Instance {
  Scenario scenario;
  std::shared_ptr<const Loss> loss;
  std::shared_ptr<const Regularizer> reg;  // null for generalized lasso scenarios
  std::optional<PenaltyMatrix> D;
  Matrix X;      // design used for the mean-squared error (empty: identity)
  Vector truth;  // beta*, vec(B*), or the clean signal / image
  Matrix X_test;
  Vector y_test;
  Vector y;  // observations for signal scenarios

  bool genlasso() const { return D.has_value(); }
  double metric(const Vector& x) const;
};

/// Design and truth are fixed across repetitions; noise, masks and test
/// labels are redrawn per repetition.
Instance generate(const ExperimentSpec& spec, Index rep = 0);

struct CurvePoint {
  double t;
  double metric;
  Index ref;  // step index or oracle grid index
};

struct ErrorCurve {
  std::string method;
  std::vector<CurvePoint> points;
};

struct MethodSummary {
  std::string name;
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double alpha = 1.0;
  double min_metric = std::numeric_limits<double>::quiet_NaN();
  double argmin_t = std::numeric_limits<double>::quiet_NaN();
  std::int64_t total_wall_ns = 0;
  std::int64_t per_estimate_wall_ns = 0;
  Index n_estimates = 0;
  std::string diagnostic;
  double worst_gap = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct Bundle {
  ExperimentSpec spec;
  std::vector<std::pair<std::string, Path>> paths;          // repetition 0
  std::vector<std::pair<std::string, OracleGrid>> oracles;  // repetition 0
  std::vector<ErrorCurve> curves;                           // averaged over repetitions
  std::vector<MethodSummary> methods;

  const MethodSummary* method(const std::string& name) const;
  const ErrorCurve* curve(const std::string& name) const;
};

/// Method names: "stagewise_eps<e>", "shrunken_eps<e>", "oracle", "fw_cap<k>".
Bundle run_experiment(const ExperimentSpec& spec);

std::string summary_json(const Bundle& bundle);

/// Writes path_*.csv, oracle_*.csv, curve_*.csv and summary.json.
void emit(const Bundle& bundle, const std::filesystem::path& out_dir);

/// Stagewise path for a generated instance (generalized lasso scenarios use
/// the dual recursion).
Path run_instance(const Instance& inst, const ExperimentSpec& spec, double epsilon, Index steps,
                  double alpha = 1.0);

/// Ridge-penalized GLM: argmin f(beta) + lambda beta^T Q beta by Newton.
Vector ridge_glm(const GlmLoss& loss, const Matrix& Q, double lambda, double tol = 1e-10);

}  // namespace stagewise
