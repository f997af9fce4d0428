#include "stagewise/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>

namespace stagewise {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - since).count();
}

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 0x100000001b3ULL;
    }
  }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  template <class T>
  void pod(T v) { bytes(&v, sizeof v); }
};

Path run_impl(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg, bool shrink) {
  cfg.validate();
  if (loss.dim() != reg.dim()) {
    throw InputError("loss has dimension " + std::to_string(loss.dim()) +
                     " but regularizer has " + std::to_string(reg.dim()));
  }
  const Index p = loss.dim();
  Vector x = cfg.x0 ? *cfg.x0 : Vector::Zero(p);
  if (x.size() != p) throw InputError("x0 has the wrong length");

  Path path;
  path.loss_kind = loss_name(loss.kind());
  path.reg_kind = reg.describe();
  path.config_hash = config_hash(loss, reg, cfg);
  path.epsilon = cfg.epsilon;
  path.alpha = shrink ? cfg.alpha : 1.0;
  path.records.reserve(static_cast<std::size_t>(std::min<Index>(cfg.max_steps + 1, 1 << 20)));

  const Index stride = cfg.record.stride(cfg.max_steps);
  const auto want_state = [&](Index k) {
    switch (cfg.record.mode) {
      case RecordPolicy::Mode::All: return true;
      case RecordPolicy::Mode::Endpoints: return k == 0;
      case RecordPolicy::Mode::EveryK: return k % stride == 0;
    }
    return false;
  };

  auto start = Clock::now();
  Vector grad, delta;
  double f = loss.value_grad(x, grad);
  if (!std::isfinite(f)) throw NumericError("non-finite loss at step 0");
  double t = cfg.t0;
  {
    PathRecord r;
    r.step = 0;
    r.t = t;
    r.g = cfg.track_g ? reg.value(x) : std::numeric_limits<double>::quiet_NaN();
    r.f = f;
    if (want_state(0)) r.state = x;
    r.wall_ns = cfg.timing ? elapsed_ns(start) : 0;
    path.records.push_back(std::move(r));
  }

  Index stall = 0;
  for (Index k = 1; k <= cfg.max_steps; ++k) {
    start = Clock::now();
    reg.lmo(grad, cfg.epsilon, delta);
    if (delta.cwiseAbs().maxCoeff() == 0.0) {
      path.status = StopReason::Stationary;
      break;
    }
    if (shrink) {
      x *= cfg.alpha;
      t = cfg.alpha * t + cfg.epsilon;
    } else {
      t = cfg.t0 + static_cast<double>(k) * cfg.epsilon;
    }
    x += delta;
    f = loss.value_grad(x, grad);
    if (!std::isfinite(f) || !grad.allFinite()) {
      throw NumericError("non-finite loss or gradient at step " + std::to_string(k));
    }
    PathRecord r;
    r.step = k;
    r.t = t;
    r.g = cfg.track_g ? reg.value(x) : std::numeric_limits<double>::quiet_NaN();
    r.f = f;
    if (want_state(k)) r.state = x;
    r.wall_ns = cfg.timing ? elapsed_ns(start) : 0;
    const double g_prev = path.records.back().g;
    path.records.push_back(std::move(r));

    if (cfg.stop_g_stall && cfg.track_g) {
      stall = std::fabs(path.records.back().g - g_prev) < *cfg.stop_g_stall ? stall + 1 : 0;
      if (stall >= 5) {
        path.status = StopReason::GStall;
        break;
      }
    }
  }
  if (!path.records.back().state) path.records.back().state = x;
  path.final_state = std::move(x);
  return path;
}

}  // namespace

Index RecordPolicy::stride(Index max_steps) const {
  if (mode == Mode::All) return 1;
  if (mode == Mode::Endpoints) return std::max<Index>(1, max_steps + 1);
  return k > 0 ? k : std::max<Index>(1, max_steps / 500);
}

const char* stop_name(StopReason reason) {
  switch (reason) {
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::Stationary: return "stationary";
    case StopReason::GStall: return "g_stall";
  }
  return "unknown";
}

void StagewiseConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InputError("epsilon must be positive");
  if (max_steps < 0) throw InputError("max_steps must be nonnegative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in (0, 1]");
  if (!(t0 >= 0.0)) throw InputError("t0 must be nonnegative");
  if (record.mode == RecordPolicy::Mode::EveryK && record.k < 0) {
    throw InputError("record stride must be nonnegative");
  }
  if (stop_g_stall && !(*stop_g_stall > 0.0)) throw InputError("g-stall threshold must be positive");
}

std::int64_t Path::total_wall_ns() const {
  std::int64_t s = 0;
  for (const auto& r : records) s += r.wall_ns;
  return s;
}

Path run_stagewise(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg) {
  if (cfg.alpha < 1.0) return run_shrunken(loss, reg, cfg);
  return run_impl(loss, reg, cfg, false);
}

Path run_shrunken(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg) {
  if (cfg.alpha == 1.0) return run_impl(loss, reg, cfg, false);
  return run_impl(loss, reg, cfg, true);
}

StagewiseConfig resume_config(const Path& path, StagewiseConfig cfg) {
  if (path.records.empty()) throw InputError("cannot resume from an empty path");
  cfg.x0 = path.final_state;
  cfg.t0 = path.back().t;
  return cfg;
}

std::uint64_t config_hash(const Loss& loss, const Regularizer& reg, const StagewiseConfig& cfg) {
  Fnv h;
  h.str(loss_name(loss.kind()));
  h.str(reg.describe());
  h.pod(cfg.epsilon);
  h.pod(cfg.max_steps);
  h.pod(cfg.alpha);
  h.pod(cfg.t0);
  h.pod(static_cast<int>(cfg.record.mode));
  h.pod(cfg.record.k);
  h.pod(cfg.stop_g_stall.value_or(0.0));
  if (cfg.x0) h.bytes(cfg.x0->data(), sizeof(double) * static_cast<std::size_t>(cfg.x0->size()));
  return h.h;
}

Vector init_null_space(const Loss& loss, const QuadraticForm& qf) {
  const Index p = qf.dim();
  if (loss.dim() != p) throw InputError("init_null_space: dimension mismatch");
  const Matrix& N = qf.null_basis();
  if (N.cols() == 0) return Vector::Zero(p);

  if (const auto* ls = dynamic_cast<const LeastSquaresLoss*>(&loss)) {
    const Matrix XN = ls->data().X * N;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(XN);
    const Vector theta = cod.solve(ls->data().y);
    return N * theta;
  }
  if (const auto* gs = dynamic_cast<const GaussianSignalLoss*>(&loss)) {
    // N has orthonormal columns
    return N * (N.transpose() * gs->y());
  }
  if (const auto* glm = dynamic_cast<const GlmLoss*>(&loss)) {
    const Matrix XN = glm->data().X * N;
    Vector theta = Vector::Zero(N.cols());
    Vector beta = N * theta, grad;
    double f = glm->value_grad(beta, grad);
    for (int it = 0; it < 200; ++it) {
      const Vector gt = N.transpose() * grad;
      if (gt.norm() <= 1e-10) return beta;
      const Vector mu = glm->mean(beta);
      Vector w = mu;
      if (glm->family() == GlmFamily::Logistic) w = mu.array() * (1.0 - mu.array());
      const Matrix H = XN.transpose() * w.asDiagonal() * XN;
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(H);
      const Vector step = cod.solve(gt);
      double s = 1.0;
      for (int ls_it = 0; ls_it < 60; ++ls_it, s *= 0.5) {
        const Vector cand = theta - s * step;
        const double fc = glm->value(N * cand);
        if (fc <= f - 1e-4 * s * gt.dot(step)) {
          theta = cand;
          break;
        }
        if (ls_it == 59) throw ConvergenceError("init_null_space: line search failed", gt.norm());
      }
      beta = N * theta;
      f = glm->value_grad(beta, grad);
    }
    throw ConvergenceError("init_null_space: Newton iterations exhausted",
                           (N.transpose() * grad).norm());
  }
  throw UnsupportedError(std::string("init_null_space: unsupported loss ") + loss_name(loss.kind()));
}

const char* diagnostic_name(DiagnosticReport::Status status) {
  switch (status) {
    case DiagnosticReport::Status::Clean: return "clean";
    case DiagnosticReport::Status::Nonmonotone: return "nonmonotone";
    case DiagnosticReport::Status::Alternating: return "alternating";
  }
  return "unknown";
}

DiagnosticReport step_size_diagnostic(const Path& path) {
  const auto& R = path.records;
  if (R.size() < 3) throw InputError("step size diagnostic needs at least 3 records");
  constexpr double slack = 1e-12;
  const auto bad = [&](std::size_t k) {
    return R[k].f > R[k - 1].f - slack || R[k].g < R[k - 1].g + slack;
  };
  DiagnosticReport rep;
  std::size_t first = 0;
  for (std::size_t k = 1; k < R.size(); ++k) {
    if (bad(k)) {
      first = k;
      break;
    }
  }
  if (first == 0) {
    rep.recommendation = "none";
    return rep;
  }
  rep.first_failure = R[first].step;
  // stretch after the first failure in which no two consecutive steps are
  // both monotone
  Index run = 0;
  bool prev_good = false;
  for (std::size_t k = first; k < R.size(); ++k) {
    const bool good = !bad(k);
    if (good && prev_good) break;
    prev_good = good;
    ++run;
  }
  rep.alternating_run = run;
  rep.status = run >= 4 ? DiagnosticReport::Status::Alternating
                        : DiagnosticReport::Status::Nonmonotone;
  rep.restart_step = R[first - 1].step;
  rep.suggested_epsilon = path.epsilon / 2.0;
  rep.recommendation = "halve epsilon and restart from step " + std::to_string(*rep.restart_step);
  return rep;
}

namespace {

double axis_value(const PathRecord& r, PathAxis axis) { return axis == PathAxis::Static ? r.t : r.g; }

}  // namespace

std::pair<double, double> snapshot_range(const Path& path, PathAxis axis) {
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& r : path.records) {
    if (!r.state) continue;
    lo = std::min(lo, axis_value(r, axis));
    hi = std::max(hi, axis_value(r, axis));
  }
  if (lo > hi) throw RangeError("path has no snapshots");
  return {lo, hi};
}

Vector interpolate_path(const Path& path, double t, PathAxis axis) {
  const PathRecord* prev = nullptr;
  for (const auto& r : path.records) {
    if (!r.state) continue;
    const double tr = axis_value(r, axis);
    if (tr == t) return *r.state;
    if (prev) {
      const double tp = axis_value(*prev, axis);
      if ((tp < t && t < tr) || (tr < t && t < tp)) {
        const double w = (t - tp) / (tr - tp);
        return (1.0 - w) * *prev->state + w * *r.state;
      }
    }
    prev = &r;
  }
  throw RangeError("t = " + std::to_string(t) + " is outside the recorded snapshots");
}

std::vector<LagrangeEntry> effective_lagrange(const Path& path, const Loss& loss,
                                              const Regularizer& reg) {
  std::vector<LagrangeEntry> out;
  for (const auto& r : path.records) {
    if (!r.state) continue;
    const double lambda = reg.dual_value(loss.gradient(*r.state));
    double ratio;
    if (r.t > 0) {
      ratio = lambda / r.t;
    } else {
      ratio = lambda > 0 ? INFINITY : 0.0;
    }
    out.push_back({r.step, lambda, r.t, ratio});
  }
  return out;
}

std::vector<Theorem1Margin> theorem1_check(const Path& path, const Regularizer& reg, double L,
                                           const OracleAtT& oracle, std::span<const Index> steps) {
  std::vector<Theorem1Margin> out;
  if (!reg.is_norm() || path.records.empty()) return out;
  const double t0 = path.records.front().t;
  const double eps = path.epsilon;
  const auto audit = [&](const PathRecord& r) {
    const double t = r.t;
    const double bound = L * (t * t - t0 * t0) + L * (t - t0) * eps;
    const auto [f_or, gap] = oracle(t);
    const double excess = r.f - (f_or - gap);
    out.push_back({r.step, t, bound, excess, bound - excess});
  };
  if (steps.empty()) {
    for (const auto& r : path.records) audit(r);
  } else {
    for (Index k : steps) {
      const auto it = std::find_if(path.records.begin(), path.records.end(),
                                   [k](const PathRecord& r) { return r.step == k; });
      if (it == path.records.end()) throw RangeError("step " + std::to_string(k) + " not in path");
      audit(*it);
    }
  }
  return out;
}

LipschitzConstant lipschitz_ls(const Matrix& X, const Regularizer& reg) {
  if (X.cols() != reg.dim()) throw InputError("lipschitz_ls: dimension mismatch");
  const Matrix M = X.transpose() * X;
  if (reg.kind() == RegKind::L1) return {M.cwiseAbs().maxCoeff(), true};
  if (reg.kind() == RegKind::Group) {
    const auto& gr = static_cast<const GroupRegularizer&>(reg);
    if (!gr.all_l2()) throw UnsupportedError("lipschitz_ls: only l2 groups are supported");
    const auto& part = gr.partition();
    // the unit ball of g has its extreme points on single groups, so the
    // supremum is attained blockwise
    double L = 0.0;
    for (Index i = 0; i < part.count(); ++i) {
      for (Index j = 0; j < part.count(); ++j) {
        const auto& Ii = part.groups[static_cast<std::size_t>(i)];
        const auto& Ij = part.groups[static_cast<std::size_t>(j)];
        Matrix B(static_cast<Index>(Ii.size()), static_cast<Index>(Ij.size()));
        for (std::size_t a = 0; a < Ii.size(); ++a)
          for (std::size_t b = 0; b < Ij.size(); ++b)
            B(static_cast<Index>(a), static_cast<Index>(b)) = M(Ii[a], Ij[b]);
        Eigen::JacobiSVD<Matrix> svd(B);
        const double s = svd.singularValues()(0);
        const double w = part.weights[static_cast<std::size_t>(i)] *
                         part.weights[static_cast<std::size_t>(j)];
        if (s == 0.0) continue;
        if (w == 0.0) return {INFINITY, true};
        L = std::max(L, s / w);
      }
    }
    return {L, true};
  }
  throw UnsupportedError(std::string("lipschitz_ls: unsupported regularizer ") + reg.describe());
}

}  // namespace stagewise
