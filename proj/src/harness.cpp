#include "stagewise/harness.hpp"

#include <algorithm>
#include <chrono>
#include <climits>
#include <cstdio>
#include <cmath>
#include <future>
#include <random>
#include <set>

#include "json.hpp"
#include "stagewise/genlasso.hpp"

namespace stagewise {

namespace {

enum Stream : std::uint32_t { kDesign = 1, kTruth = 2, kNoise = 3, kMask = 4, kTest = 5, kTestLabels = 6 };

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Rng {
  std::mt19937_64 gen;
  std::normal_distribution<double> normal{0.0, 1.0};
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double gauss() { return normal(gen); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  Vector gauss_vec(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = gauss();
    return v;
  }
  Matrix gauss_mat(Index r, Index c) {
    Matrix M(r, c);
    // column-major fill order
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) M(i, j) = gauss();
    return M;
  }
  // k distinct sorted values from {0..n-1}
  std::vector<Index> choose(Index n, Index k) {
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    std::shuffle(all.begin(), all.end(), gen);
    all.resize(static_cast<std::size_t>(k));
    std::sort(all.begin(), all.end());
    return all;
  }
};

// rows x = sqrt(rho) z + sqrt(1 - rho) e with one shared z per row: unit
// variances and constant correlation rho
Matrix equicorrelated(Rng& rng, Index n, Index p, double rho) {
  Matrix X = rng.gauss_mat(n, p);
  if (rho > 0) {
    const Vector z = rng.gauss_vec(n);
    X = std::sqrt(1.0 - rho) * X;
    X.colwise() += std::sqrt(rho) * z;
  }
  return X;
}

// predictor k of every group shares a common factor: each predictor has
// correlation rho with one partner in every other group
Matrix group_correlated(Rng& rng, Index n, const GroupPartition& part, double rho) {
  Index size = 0;
  for (const auto& g : part.groups) size = std::max<Index>(size, static_cast<Index>(g.size()));
  const Matrix Z = rng.gauss_mat(n, size);
  Matrix X = std::sqrt(1.0 - rho) * rng.gauss_mat(n, part.dim());
  for (const auto& g : part.groups) {
    for (std::size_t k = 0; k < g.size(); ++k) X.col(g[k]) += std::sqrt(rho) * Z.col(static_cast<Index>(k));
  }
  return X;
}

Vector piecewise_signal(Rng& rng, Index n, Index segments) {
  const auto cuts = rng.choose(n - 1, segments - 1);  // boundaries after index c
  Vector s(n);
  Index start = 0;
  for (Index seg = 0; seg < segments; ++seg) {
    const Index end = seg + 1 < segments ? cuts[static_cast<std::size_t>(seg)] + 1 : n;
    const double level = rng.uniform(1.0, 10.0);
    for (Index i = start; i < end; ++i) s(i) = level;
    start = end;
  }
  return s;
}

Vector two_level_image(Index h, Index w, double level) {
  Vector img = Vector::Zero(h * w);
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const bool block = r >= h / 5 && r < h / 2 + h / 10 && c >= w / 4 && c < (3 * w) / 4;
      const bool corner = r >= (2 * h) / 3 && c < w / 3;
      if (block || corner) img(r * w + c) = level;
    }
  }
  return img;
}

std::string eps_tag(double e) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", e);
  return buf;
}

}  // namespace

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::GroupUncorr: return "group_uncorr";
    case Scenario::GroupCorr: return "group_corr";
    case Scenario::MatComp: return "matcomp";
    case Scenario::Image2d: return "image2d";
    case Scenario::RidgeLogisticUncorr: return "ridge_logistic_uncorr";
    case Scenario::RidgeLogisticCorr: return "ridge_logistic_corr";
    case Scenario::MonotoneLasso: return "monotone_lasso";
    case Scenario::ShrunkenLasso: return "shrunken_lasso";
    case Scenario::Fused1d: return "fused_1d";
  }
  return "unknown";
}

std::vector<Scenario> all_scenarios() {
  return {Scenario::GroupUncorr,         Scenario::GroupCorr,         Scenario::MatComp,
          Scenario::Image2d,             Scenario::RidgeLogisticUncorr, Scenario::RidgeLogisticCorr,
          Scenario::MonotoneLasso,       Scenario::ShrunkenLasso,     Scenario::Fused1d};
}

std::optional<Scenario> parse_scenario(const std::string& name) {
  for (Scenario s : all_scenarios()) {
    if (name == scenario_name(s)) return s;
  }
  return std::nullopt;
}

std::uint64_t stream_seed(std::uint64_t seed, Index rep, std::uint32_t component) {
  return splitmix64(splitmix64(seed) ^ splitmix64((static_cast<std::uint64_t>(rep) << 8) | component));
}

ExperimentSpec ExperimentSpec::defaults(Scenario s) {
  ExperimentSpec e;
  e.scenario = s;
  switch (s) {
    case Scenario::GroupUncorr:
      e.n = 50, e.p = 100, e.groups = 10, e.active_groups = 2, e.noise = 2.0, e.rho = 0.0;
      e.epsilons = {0.02, 0.2};
      e.steps = 500;
      break;
    case Scenario::GroupCorr:
      e.n = 50, e.p = 100, e.groups = 10, e.active_groups = 2, e.noise = 3.0, e.rho = 0.85;
      e.epsilons = {0.02, 0.2};
      e.steps = 500;
      break;
    case Scenario::MatComp:
      e.height = 30, e.width = 30, e.rank = 3, e.observed_fraction = 0.6, e.noise = 1.0;
      e.epsilons = {1.0, 5.0};
      e.steps = 100;
      e.power_max_iter = 20000;
      break;
    case Scenario::Image2d:
      e.height = 20, e.width = 20, e.noise = 1.0, e.level = 3.0;
      e.epsilons = {1.0 / 512, 1.0 / 64};
      e.steps = 1200;
      e.gap_tol = 1e-7;
      break;
    case Scenario::RidgeLogisticUncorr:
    case Scenario::RidgeLogisticCorr:
      e.n = 200, e.p = 50, e.nonzeros = 5;
      e.rho = s == Scenario::RidgeLogisticCorr ? 0.8 : 0.0;
      e.epsilons = {1e-4, 1e-2};
      e.steps = 400;
      break;
    case Scenario::MonotoneLasso:
      e.n = 10, e.p = 10, e.segments = 5, e.noise = 1.0;
      e.epsilons = {1e-3};
      e.steps = 20000;
      e.record = RecordPolicy::every(10);
      break;
    case Scenario::ShrunkenLasso:
      e.n = 20, e.p = 10, e.rho = 0.8, e.noise = 1.0;
      e.epsilons = {1e-3};
      e.steps = 8000;
      e.record = RecordPolicy::every(10);
      break;
    case Scenario::Fused1d:
      e.n = 20, e.p = 20, e.segments = 5, e.noise = 1.0;
      e.epsilons = {0.01};
      e.steps = 4000;
      break;
  }
  return e;
}

void ExperimentSpec::validate() const {
  const auto positive = [](Index v, const char* what) {
    if (v < 1) throw InputError(std::string(what) + " must be positive");
  };
  positive(reps, "reps");
  positive(n, "n");
  positive(p, "p");
  positive(groups, "groups");
  positive(rank, "rank");
  positive(height, "height");
  positive(width, "width");
  positive(segments, "segments");
  positive(steps, "steps");
  positive(grid_points, "grid_points");
  positive(threads, "threads");
  if (!(noise >= 0.0)) throw InputError("noise must be nonnegative");
  if (!(rho >= 0.0 && rho < 1.0)) throw InputError("rho must lie in [0, 1)");
  if (!(observed_fraction > 0.0 && observed_fraction < 1.0)) {
    throw InputError("observed fraction must lie in (0, 1)");
  }
  if (epsilons.empty()) throw InputError("at least one epsilon is required");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InputError("epsilon must be positive");
  }
  if (alpha && !(*alpha > 0.0 && *alpha <= 1.0)) throw InputError("alpha must lie in (0, 1]");
  if (!(gap_tol > 0.0)) throw InputError("gap tolerance must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0) || (i > 0 && !(t_grid[i] > t_grid[i - 1]))) {
      throw InputError("t grid must be nonnegative and strictly ascending");
    }
  }
  switch (scenario) {
    case Scenario::GroupUncorr:
    case Scenario::GroupCorr:
      if (groups > p) throw InputError("more groups than predictors");
      if (active_groups < 1 || active_groups > groups) throw InputError("active groups out of range");
      break;
    case Scenario::MatComp:
      if (rank > std::min(height, width)) throw InputError("rank exceeds matrix dimensions");
      break;
    case Scenario::RidgeLogisticUncorr:
    case Scenario::RidgeLogisticCorr:
      if (nonzeros < 1 || nonzeros > p) throw InputError("nonzeros out of range");
      break;
    case Scenario::MonotoneLasso:
    case Scenario::Fused1d:
      if (segments > n) throw InputError("more segments than points");
      break;
    default:
      break;
  }
}

Metric ExperimentSpec::metric() const {
  return scenario == Scenario::RidgeLogisticUncorr || scenario == Scenario::RidgeLogisticCorr
             ? Metric::TestMisclass
             : Metric::MseToTruth;
}

double Instance::metric(const Vector& x) const {
  if (X_test.size() > 0) {
    const Vector eta = X_test * x;
    Index wrong = 0;
    for (Index i = 0; i < eta.size(); ++i) {
      const double pred = eta(i) > 0.0 ? 1.0 : 0.0;
      if (pred != y_test(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(eta.size());
  }
  if (X.size() > 0) return (X * (x - truth)).squaredNorm() / static_cast<double>(X.rows());
  return (x - truth).squaredNorm() / static_cast<double>(truth.size());
}

Instance generate(const ExperimentSpec& spec, Index rep) {
  spec.validate();
  Instance inst;
  inst.scenario = spec.scenario;
  Rng design(stream_seed(spec.seed, 0, kDesign));
  Rng truth(stream_seed(spec.seed, 0, kTruth));
  Rng noise(stream_seed(spec.seed, rep, kNoise));

  switch (spec.scenario) {
    case Scenario::GroupUncorr:
    case Scenario::GroupCorr: {
      GroupPartition part = GroupPartition::equal(spec.p, spec.groups);
      Matrix X = spec.scenario == Scenario::GroupCorr ? group_correlated(design, spec.n, part, spec.rho)
                                                      : design.gauss_mat(spec.n, spec.p);
      Vector beta = Vector::Zero(spec.p);
      for (Index g : truth.choose(spec.groups, spec.active_groups)) {
        for (Index i : part.groups[static_cast<std::size_t>(g)]) beta(i) = truth.gauss();
      }
      Vector y = X * beta + spec.noise * noise.gauss_vec(spec.n);
      inst.X = X;
      inst.truth = beta;
      inst.loss = std::make_shared<LeastSquaresLoss>(Dataset{std::move(X), std::move(y)});
      inst.reg = std::make_shared<GroupRegularizer>(std::move(part));
      break;
    }
    case Scenario::MatComp: {
      const Index m = spec.height, n = spec.width;
      const Matrix U = truth.gauss_mat(m, spec.rank);
      const Matrix V = truth.gauss_mat(n, spec.rank);
      // square matrices use the symmetric B* = U U^T
      const Matrix B = m == n ? Matrix(U * U.transpose()) : Matrix(U * V.transpose());
      Rng mask(stream_seed(spec.seed, rep, kMask));
      const auto total = m * n;
      const auto keep = std::max<Index>(1, static_cast<Index>(std::lround(spec.observed_fraction * total)));
      std::vector<Observation> obs;
      for (Index k : mask.choose(total, keep)) {
        const Index i = k % m, j = k / m;
        obs.push_back({i, j, B(i, j) + spec.noise * noise.gauss()});
      }
      inst.truth = Eigen::Map<const Vector>(B.data(), total);
      inst.loss = std::make_shared<MatrixCompletionLoss>(ObservedMatrix(m, n, std::move(obs)));
      PowerMethodConfig pm;
      pm.max_iter = spec.power_max_iter;
      inst.reg = std::make_shared<TraceRegularizer>(m, n, pm);
      break;
    }
    case Scenario::Image2d: {
      Index h = spec.height, w = spec.width;
      Vector img;
      if (spec.image) {
        const io::Image im = io::read_pgm(*spec.image);
        h = im.height;
        w = im.width;
        img = spec.level * im.pixels;
      } else {
        img = two_level_image(h, w, spec.level);
      }
      inst.truth = img;
      inst.y = img + spec.noise * noise.gauss_vec(h * w);
      inst.D = PenaltyMatrix::grid2d(h, w);
      inst.loss = std::make_shared<GaussianSignalLoss>(inst.y);
      break;
    }
    case Scenario::Fused1d: {
      inst.truth = piecewise_signal(truth, spec.n, spec.segments);
      inst.y = inst.truth + spec.noise * noise.gauss_vec(spec.n);
      inst.D = PenaltyMatrix::chain(spec.n);
      inst.loss = std::make_shared<GaussianSignalLoss>(inst.y);
      break;
    }
    case Scenario::MonotoneLasso: {
      const Index n = spec.n;
      Matrix X = Matrix::Zero(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) X(i, j) = 1.0;
      const Vector theta = piecewise_signal(truth, n, std::min(spec.segments, n));
      Vector beta(n);
      beta(0) = theta(0);
      for (Index i = 1; i < n; ++i) beta(i) = theta(i) - theta(i - 1);
      Vector y = theta + spec.noise * noise.gauss_vec(n);
      inst.X = X;
      inst.truth = beta;
      inst.loss = std::make_shared<LeastSquaresLoss>(Dataset{std::move(X), std::move(y)});
      inst.reg = std::make_shared<L1Regularizer>(n);
      break;
    }
    case Scenario::ShrunkenLasso: {
      Matrix X = equicorrelated(design, spec.n, spec.p, spec.rho);
      const Vector beta = truth.gauss_vec(spec.p);
      Vector y = X * beta + spec.noise * noise.gauss_vec(spec.n);
      inst.X = X;
      inst.truth = beta;
      inst.loss = std::make_shared<LeastSquaresLoss>(Dataset{std::move(X), std::move(y)});
      inst.reg = std::make_shared<L1Regularizer>(spec.p);
      break;
    }
    case Scenario::RidgeLogisticUncorr:
    case Scenario::RidgeLogisticCorr: {
      Matrix X = equicorrelated(design, spec.n, spec.p, spec.rho);
      Vector beta = Vector::Zero(spec.p);
      for (Index i : truth.choose(spec.p, spec.nonzeros)) beta(i) = truth.gauss();
      Rng test(stream_seed(spec.seed, 0, kTest));
      Rng labels(stream_seed(spec.seed, rep, kTestLabels));
      const auto draw = [](Rng& r, const Vector& eta) {
        Vector y(eta.size());
        for (Index i = 0; i < eta.size(); ++i) {
          const double prob = 1.0 / (1.0 + std::exp(-eta(i)));
          y(i) = r.uniform(0.0, 1.0) < prob ? 1.0 : 0.0;
        }
        return y;
      };
      Vector y = draw(noise, X * beta);
      inst.X_test = equicorrelated(test, 4 * spec.n, spec.p, spec.rho);
      inst.y_test = draw(labels, inst.X_test * beta);
      inst.truth = beta;
      inst.X = X;
      inst.loss = std::make_shared<GlmLoss>(Dataset{std::move(X), std::move(y)}, GlmFamily::Logistic);
      inst.reg = std::make_shared<QuadraticRegularizer>(QuadraticForm::dense(Matrix::Identity(spec.p, spec.p)));
      break;
    }
  }
  return inst;
}

Path run_instance(const Instance& inst, const ExperimentSpec& spec, double epsilon, Index steps,
                  double alpha) {
  if (inst.genlasso()) {
    GenlassoConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_steps = steps;
    cfg.record = spec.record;
    cfg.timing = spec.timing;
    return run_genlasso_dual(static_cast<const GaussianSignalLoss&>(*inst.loss), *inst.D, cfg);
  }
  StagewiseConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_steps = steps;
  cfg.alpha = alpha;
  cfg.record = spec.record;
  cfg.timing = spec.timing;
  // the nuclear norm needs a full decomposition per step; the static t is canonical
  cfg.track_g = inst.reg->kind() != RegKind::Trace;
  if (inst.reg->kind() == RegKind::Quadratic) {
    cfg.x0 = init_null_space(*inst.loss, static_cast<const QuadraticRegularizer&>(*inst.reg).form());
  }
  return alpha < 1.0 ? run_shrunken(*inst.loss, *inst.reg, cfg) : run_stagewise(*inst.loss, *inst.reg, cfg);
}

Vector ridge_glm(const GlmLoss& loss, const Matrix& Q, double lambda, double tol) {
  const Index p = loss.dim();
  if (Q.rows() != p || Q.cols() != p) throw InputError("ridge_glm: Q has the wrong size");
  const Matrix& X = loss.data().X;
  Vector beta = Vector::Zero(p), grad;
  const auto objective = [&](const Vector& b) { return loss.value(b) + lambda * b.dot(Q * b); };
  double obj = objective(beta);
  for (int it = 0; it < 200; ++it) {
    loss.value_grad(beta, grad);
    grad += 2.0 * lambda * (Q * beta);
    if (grad.norm() <= tol) return beta;
    const Vector mu = loss.mean(beta);
    Vector w = mu;
    if (loss.family() == GlmFamily::Logistic) w = mu.array() * (1.0 - mu.array());
    const Matrix H = X.transpose() * w.asDiagonal() * X + 2.0 * lambda * Q;
    const Vector step = Eigen::CompleteOrthogonalDecomposition<Matrix>(H).solve(grad);
    double s = 1.0;
    bool moved = false;
    for (int k = 0; k < 60; ++k, s *= 0.5) {
      const Vector cand = beta - s * step;
      const double oc = objective(cand);
      if (oc <= obj - 1e-4 * s * grad.dot(step)) {
        beta = cand;
        obj = oc;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  loss.value_grad(beta, grad);
  grad += 2.0 * lambda * (Q * beta);
  if (grad.norm() > std::max(tol, 1e-6)) throw ConvergenceError("ridge_glm did not converge", grad.norm());
  return beta;
}

// ---- experiment

namespace {

struct RepResult {
  std::vector<Path> paths;                 // one per stagewise method
  std::vector<std::vector<double>> path_metric;
  std::optional<OracleGrid> oracle;
  std::vector<double> oracle_metric;
  std::int64_t oracle_ns = 0;
  std::optional<std::vector<CertifiedSolution>> fw;
  std::vector<double> fw_metric;
  std::int64_t fw_ns = 0;
  std::vector<std::string> errors;  // per method, empty when fine
  std::string oracle_error, fw_error;
};

struct MethodPlan {
  std::string name;
  double epsilon;
  Index steps;
  double alpha;
};

std::vector<MethodPlan> plan_methods(const ExperimentSpec& spec, bool quadratic) {
  std::vector<MethodPlan> plans;
  const double e0 = spec.epsilons.front();
  for (double e : spec.epsilons) {
    const double ratio = quadratic ? std::sqrt(e0 / e) : e0 / e;
    const Index steps = std::max<Index>(1, static_cast<Index>(std::llround(spec.steps * ratio)));
    plans.push_back({"stagewise_eps" + eps_tag(e), e, steps, 1.0});
  }
  if (spec.scenario == Scenario::ShrunkenLasso || spec.alpha) {
    for (double e : spec.epsilons) {
      const double a = spec.alpha.value_or(StagewiseConfig::auto_alpha(e));
      if (a >= 1.0) continue;
      // same t range as the pure run, capped below t_inf = eps / (1 - alpha)
      const double reach = std::min(spec.steps * e0, 0.95 * e / (1.0 - a));
      const Index steps = std::max<Index>(
          1, static_cast<Index>(std::ceil(std::log(1.0 - reach * (1.0 - a) / e) / std::log(a))));
      plans.push_back({"shrunken_eps" + eps_tag(e), e, steps, a});
    }
  }
  return plans;
}

std::vector<double> default_grid(const ExperimentSpec& spec, double t_max) {
  if (!spec.t_grid.empty()) return spec.t_grid;
  std::vector<double> g;
  for (Index i = 0; i < spec.grid_points; ++i) {
    g.push_back(t_max * static_cast<double>(i) / static_cast<double>(spec.grid_points - 1));
  }
  return g;
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void run_paths(RepResult& res, const Instance& inst, const ExperimentSpec& spec,
               const std::vector<MethodPlan>& plans) {
  for (const auto& m : plans) {
    try {
      Path path = run_instance(inst, spec, m.epsilon, m.steps, m.alpha);
      std::vector<double> metric;
      for (const auto& r : path.records) metric.push_back(r.state ? inst.metric(*r.state) : NAN);
      res.paths.push_back(std::move(path));
      res.path_metric.push_back(std::move(metric));
      res.errors.emplace_back();
    } catch (const Error& e) {
      res.paths.emplace_back();
      res.path_metric.emplace_back();
      res.errors.emplace_back(e.what());
    }
  }
}

void run_oracles(RepResult& res, const Instance& inst, const ExperimentSpec& spec,
                 const std::vector<double>& shared_grid) {
  if (!spec.run_oracle) return;

  const auto timer = [&spec]() { return spec.timing ? now_ns() : 0; };
  try {
    const auto start = timer();
    if (inst.genlasso()) {
      // Lagrange grid from heavy to light regularization so t ascends
      double lambda_max = 0.0;
      for (const auto& p : res.paths) {
        for (const auto& r : p.records) {
          if (std::isfinite(r.lambda)) lambda_max = std::max(lambda_max, r.lambda);
        }
      }
      {
        // fully regularized fit: beta in null(D), u the min-norm solution of D^T u = y - beta
        const Matrix Dt = inst.D->dense().transpose();
        const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Dt);
        const Vector u = cod.solve(inst.y);
        lambda_max = std::max(lambda_max, u.cwiseAbs().maxCoeff());
      }
      if (lambda_max <= 0.0) lambda_max = 1.0;
      OracleGrid grid;
      const double tol = spec.gap_tol * std::max(1.0, 0.5 * inst.y.squaredNorm());
      grid.gap_tol = tol;
      Vector warm = Vector::Zero(inst.D->rows());
      for (Index i = spec.grid_points - 1; i >= 0; --i) {
        const double lambda = lambda_max * static_cast<double>(i) / static_cast<double>(spec.grid_points - 1);
        const GenlassoSolution s = genlasso_lagrange(inst.y, *inst.D, lambda, tol, 200000, &warm);
        warm = s.u;
        CertifiedSolution c;
        c.x = s.beta;
        c.t = inst.D->apply(s.beta).cwiseAbs().sum();
        c.gap = s.gap();
        c.f = 0.5 * (inst.y - s.beta).squaredNorm();
        c.iterations = s.iterations;
        c.converged = s.converged;
        grid.t.push_back(c.t);
        grid.solutions.push_back(std::move(c));
      }
      res.oracle = std::move(grid);
    } else if (inst.reg->kind() == RegKind::Quadratic) {
      // Lagrange path through Newton; t = beta^T Q beta
      const auto& glm = static_cast<const GlmLoss&>(*inst.loss);
      const auto& Q = static_cast<const QuadraticRegularizer&>(*inst.reg).form().matrix();
      OracleGrid grid;
      grid.gap_tol = spec.gap_tol;
      for (Index i = 0; i < spec.grid_points; ++i) {
        // lambda from 1e3 down to 1e-3
        const double lambda = std::pow(10.0, 3.0 - 6.0 * static_cast<double>(i) / static_cast<double>(spec.grid_points - 1));
        CertifiedSolution c;
        c.x = ridge_glm(glm, Q, lambda, spec.gap_tol);
        c.t = c.x.dot(Q * c.x);
        c.f = glm.value(c.x);
        c.gap = 0.0;
        c.converged = true;
        grid.t.push_back(c.t);
        grid.solutions.push_back(std::move(c));
      }
      res.oracle = std::move(grid);
    } else {
      OracleOptions opts;
      opts.gap_tol = spec.gap_tol;
      res.oracle = solve_grid(*inst.loss, *inst.reg, shared_grid, opts);
    }
    res.oracle_ns = timer() - start;
    for (const auto& s : res.oracle->solutions) res.oracle_metric.push_back(inst.metric(s.x));
  } catch (const Error& e) {
    res.oracle_error = e.what();
    res.oracle.reset();
  }

  if (spec.fw_cap > 0 && !inst.genlasso() && inst.reg->is_norm()) {
    try {
      const auto start = timer();
      std::vector<CertifiedSolution> sols;
      std::optional<Vector> warm;
      for (double t : shared_grid) {
        FWConfig cfg{t, spec.gap_tol, spec.fw_cap};
        CertifiedSolution s = run_fw(*inst.loss, *inst.reg, cfg, warm);
        warm = s.x;
        res.fw_metric.push_back(inst.metric(s.x));
        sols.push_back(std::move(s));
      }
      res.fw = std::move(sols);
      res.fw_ns = timer() - start;
    } catch (const Error& e) {
      res.fw_error = e.what();
    }
  }
}

RepResult run_rep(const ExperimentSpec& spec, Index rep, const std::vector<MethodPlan>& plans,
                  const std::vector<double>& grid) {
  RepResult res;
  const Instance inst = generate(spec, rep);
  run_paths(res, inst, spec, plans);
  run_oracles(res, inst, spec, grid);
  return res;
}

void finish_summary(MethodSummary& m, const ErrorCurve& c) {
  for (const auto& pt : c.points) {
    if (std::isnan(pt.metric)) continue;
    if (std::isnan(m.min_metric) || pt.metric < m.min_metric) {
      m.min_metric = pt.metric;
      m.argmin_t = pt.t;
    }
  }
}

}  // namespace

const MethodSummary* Bundle::method(const std::string& name) const {
  for (const auto& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

const ErrorCurve* Bundle::curve(const std::string& name) const {
  for (const auto& c : curves) {
    if (c.method == name) return &c;
  }
  return nullptr;
}

Bundle run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  Bundle bundle;
  bundle.spec = spec;
  const Instance probe = generate(spec, 0);
  const bool quadratic = !probe.genlasso() && probe.reg->kind() == RegKind::Quadratic;
  const auto plans = plan_methods(spec, quadratic);

  // the oracle grid is shared by all repetitions; its range follows the
  // stagewise paths of repetition 0
  RepResult first;
  run_paths(first, probe, spec, plans);
  std::vector<double> grid;
  if (!probe.genlasso() && !quadratic) {
    double t_max = 0.0;
    for (const auto& p : first.paths) {
      for (const auto& r : p.records) t_max = std::max(t_max, r.t);
    }
    grid = default_grid(spec, t_max > 0 ? t_max : 1.0);
  }
  run_oracles(first, probe, spec, grid);

  std::vector<RepResult> reps;
  reps.push_back(std::move(first));
  if (spec.reps > 1) {
    std::vector<std::future<RepResult>> pending;
    for (Index r = 1; r < spec.reps; ++r) {
      if (spec.threads > 1) {
        pending.push_back(std::async(std::launch::async, run_rep, std::cref(spec), r, std::cref(plans), std::cref(grid)));
        if (static_cast<Index>(pending.size()) >= spec.threads) {
          for (auto& f : pending) reps.push_back(f.get());
          pending.clear();
        }
      } else {
        reps.push_back(run_rep(spec, r, plans, grid));
      }
    }
    for (auto& f : pending) reps.push_back(f.get());
  }

  // stagewise methods: average by step index over the shortest run
  for (std::size_t mi = 0; mi < plans.size(); ++mi) {
    MethodSummary ms;
    ms.name = plans[mi].name;
    ms.epsilon = plans[mi].epsilon;
    ms.alpha = plans[mi].alpha;
    ErrorCurve curve;
    curve.method = ms.name;
    std::size_t len = SIZE_MAX;
    for (const auto& r : reps) {
      if (!r.errors[mi].empty()) {
        if (ms.error.empty()) ms.error = r.errors[mi];
        len = 0;
        continue;
      }
      len = std::min(len, r.paths[mi].records.size());
    }
    if (len == SIZE_MAX) len = 0;
    for (std::size_t k = 0; k < len; ++k) {
      double t = 0.0, metric = 0.0;
      bool have = true;
      for (const auto& r : reps) {
        // a quadratic g is not subadditive, so its curves use g(x) itself
        const auto& rec = r.paths[mi].records[k];
        t += quadratic ? rec.g : rec.t;
        const double v = r.path_metric[mi][k];
        if (std::isnan(v)) have = false;
        metric += v;
      }
      if (!have) continue;
      const double nr = static_cast<double>(reps.size());
      curve.points.push_back({t / nr, metric / nr, reps.front().paths[mi].records[k].step});
    }
    finish_summary(ms, curve);
    for (const auto& r : reps) {
      if (r.errors[mi].empty()) {
        ms.total_wall_ns += r.paths[mi].total_wall_ns();
        ms.n_estimates += r.paths[mi].size();
      }
    }
    if (ms.n_estimates > 0) ms.per_estimate_wall_ns = ms.total_wall_ns / ms.n_estimates;
    if (ms.error.empty() && !reps.front().paths[mi].regularizing && reps.front().paths[mi].size() >= 3) {
      ms.diagnostic = diagnostic_name(step_size_diagnostic(reps.front().paths[mi]).status);
    }
    if (ms.error.empty()) bundle.paths.emplace_back(ms.name, reps.front().paths[mi]);
    bundle.curves.push_back(std::move(curve));
    bundle.methods.push_back(std::move(ms));
  }

  const auto average_grid = [&](const std::string& name, auto get_sols, auto get_metric, auto get_err,
                                auto get_ns) {
    MethodSummary ms;
    ms.name = name;
    ErrorCurve curve;
    curve.method = name;
    std::size_t len = SIZE_MAX;
    for (const auto& r : reps) {
      if (!get_err(r).empty() || !get_sols(r)) {
        if (ms.error.empty()) ms.error = get_err(r).empty() ? "not run" : get_err(r);
        len = 0;
      } else {
        len = std::min(len, get_sols(r)->size());
      }
    }
    if (len == SIZE_MAX) len = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      double t = 0.0, metric = 0.0;
      for (const auto& r : reps) {
        const auto& s = (*get_sols(r))[k];
        t += s.t;
        metric += get_metric(r)[k];
        worst = std::max(worst, s.gap);
      }
      const double nr = static_cast<double>(reps.size());
      curve.points.push_back({t / nr, metric / nr, static_cast<Index>(k)});
    }
    finish_summary(ms, curve);
    if (len > 0) ms.worst_gap = worst;
    for (const auto& r : reps) {
      ms.total_wall_ns += get_ns(r);
      if (get_sols(r)) ms.n_estimates += static_cast<Index>(get_sols(r)->size());
    }
    if (ms.n_estimates > 0) ms.per_estimate_wall_ns = ms.total_wall_ns / ms.n_estimates;
    bundle.curves.push_back(std::move(curve));
    bundle.methods.push_back(std::move(ms));
  };

  if (spec.run_oracle) {
    average_grid(
        "oracle",
        [](const RepResult& r) -> const std::vector<CertifiedSolution>* {
          return r.oracle ? &r.oracle->solutions : nullptr;
        },
        [](const RepResult& r) -> const std::vector<double>& { return r.oracle_metric; },
        [](const RepResult& r) -> const std::string& { return r.oracle_error; },
        [](const RepResult& r) { return r.oracle_ns; });
    if (reps.front().oracle) bundle.oracles.emplace_back("oracle", *reps.front().oracle);
  }
  if (spec.fw_cap > 0) {
    const std::string name = "fw_cap" + std::to_string(spec.fw_cap);
    average_grid(
        name,
        [](const RepResult& r) -> const std::vector<CertifiedSolution>* { return r.fw ? &*r.fw : nullptr; },
        [](const RepResult& r) -> const std::vector<double>& { return r.fw_metric; },
        [](const RepResult& r) -> const std::string& { return r.fw_error; },
        [](const RepResult& r) { return r.fw_ns; });
    if (reps.front().fw) {
      OracleGrid g;
      g.gap_tol = spec.gap_tol;
      g.t = grid;
      g.solutions = *reps.front().fw;
      bundle.oracles.emplace_back(name, std::move(g));
    }
  }
  return bundle;
}

std::string summary_json(const Bundle& bundle) {
  using nlohmann::ordered_json;
  const auto num = [](double v) -> ordered_json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  ordered_json j;
  j["scenario"] = scenario_name(bundle.spec.scenario);
  j["seed"] = bundle.spec.seed;
  j["reps"] = bundle.spec.reps;
  j["metric"] = bundle.spec.metric() == Metric::TestMisclass ? "test_misclass" : "mse_to_truth";
  ordered_json methods = ordered_json::object();
  for (const auto& m : bundle.methods) {
    ordered_json e;
    e["min_metric"] = num(m.min_metric);
    e["argmin_t"] = num(m.argmin_t);
    e["total_wall_ns"] = m.total_wall_ns;
    e["per_estimate_wall_ns"] = m.per_estimate_wall_ns;
    e["n_estimates"] = m.n_estimates;
    if (std::isfinite(m.epsilon)) e["epsilon"] = m.epsilon;
    if (m.alpha < 1.0) e["alpha"] = m.alpha;
    if (!m.diagnostic.empty()) e["diagnostic"] = m.diagnostic;
    if (std::isfinite(m.worst_gap)) e["worst_gap"] = m.worst_gap;
    if (!m.error.empty()) e["error"] = m.error;
    methods[m.name] = std::move(e);
  }
  j["methods"] = std::move(methods);
  return j.dump(2) + "\n";
}

void emit(const Bundle& bundle, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const auto& [name, path] : bundle.paths) {
    io::write_path_csv(path, out_dir / ("path_" + name + ".csv"), true);
  }
  for (const auto& [name, grid] : bundle.oracles) {
    io::write_oracle_csv(grid, out_dir / ("oracle_" + name + ".csv"), true);
  }
  for (const auto& c : bundle.curves) {
    if (c.points.empty()) continue;
    std::string text = "t,metric,ref\n";
    for (const auto& pt : c.points) {
      text += io::fmt(pt.t) + "," + io::fmt(pt.metric) + "," + std::to_string(pt.ref) + "\n";
    }
    io::write_text(out_dir / ("curve_" + c.method + ".csv"), text);
  }
  io::write_text(out_dir / "summary.json", summary_json(bundle));
}

}  // namespace stagewise
