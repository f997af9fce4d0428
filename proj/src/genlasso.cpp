#include "stagewise/genlasso.hpp"

#include <chrono>
#include <cmath>

#include "stagewise/kernels.hpp"

namespace stagewise {

namespace {

using Clock = std::chrono::steady_clock;

Vector sign_of(const Vector& d) {
  Vector s(d.size());
  for (Index i = 0; i < d.size(); ++i) s(i) = d(i) > 0 ? 1.0 : (d(i) < 0 ? -1.0 : 0.0);
  return s;
}

bool all_zero(const Vector& v) { return v.size() == 0 || v.cwiseAbs().maxCoeff() == 0.0; }

void check_cfg(const GenlassoConfig& cfg) {
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) throw InputError("epsilon must be positive");
  if (cfg.max_steps < 0) throw InputError("max_steps must be nonnegative");
}

struct Recorder {
  const GenlassoConfig& cfg;
  Path& path;
  Index stride;

  void add(Index k, const Vector& beta, const Vector& Dbeta, const Vector& y, double lambda,
           Clock::time_point start) {
    PathRecord r;
    r.step = k;
    r.t = kernels::sum_abs(view(Dbeta));
    r.g = r.t;
    const Vector res = y - beta;
    r.f = 0.5 * kernels::dot(view(res), view(res));
    r.lambda = lambda;
    bool keep = false;
    switch (cfg.record.mode) {
      case RecordPolicy::Mode::All: keep = true; break;
      case RecordPolicy::Mode::Endpoints: keep = k == 0; break;
      case RecordPolicy::Mode::EveryK: keep = k % stride == 0; break;
    }
    if (keep) r.state = beta;
    r.wall_ns = cfg.timing
                    ? std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count()
                    : 0;
    path.records.push_back(std::move(r));
  }
};

Path new_path(const GenlassoConfig& cfg) {
  Path path;
  path.loss_kind = loss_name(LossKind::GaussianSignal);
  path.reg_kind = "genlasso";
  path.regularizing = true;
  path.epsilon = cfg.epsilon;
  return path;
}

}  // namespace

DualState dual_init(const GaussianSignalLoss& loss, const PenaltyMatrix& D) {
  if (loss.dim() != D.cols()) throw InputError("dual_init: dimension mismatch");
  return {Vector::Zero(D.rows()), loss.y(), 0.0};
}

void dual_step(DualState& state, const Vector& beta_prev, const PenaltyMatrix& D, double eps) {
  if (state.u.size() != D.rows()) throw InputError("dual_step: dual length mismatch");
  const Vector d = D.apply(beta_prev);
  kernels::sign_step(eps, view(d), view(state.u));
  state.lambda = kernels::max_abs(view(state.u));
}

Vector primal_recover(const Vector& u, const Loss& loss, const PenaltyMatrix& D) {
  const auto* gs = dynamic_cast<const GaussianSignalLoss*>(&loss);
  if (!gs) {
    throw UnsupportedError(std::string("primal recovery is only available for the Gaussian signal loss, got ") +
                           loss_name(loss.kind()));
  }
  if (u.size() != D.rows() || gs->dim() != D.cols()) throw InputError("primal_recover: dimension mismatch");
  // the dual step subtracts eps sign(D beta), so stationarity reads
  // grad f(beta) = D^T u, i.e. beta = y + D^T u
  Vector beta = gs->y();
  D.apply_transpose_add(1.0, u, beta);
  return beta;
}

Path run_genlasso_gaussian(const Vector& y, const PenaltyMatrix& D, const GenlassoConfig& cfg) {
  check_cfg(cfg);
  if (y.size() != D.cols()) throw InputError("run_genlasso_gaussian: dimension mismatch");
  Path path = new_path(cfg);
  Recorder rec{cfg, path, cfg.record.stride(cfg.max_steps)};
  auto start = Clock::now();
  Vector beta = y;
  Vector u = Vector::Zero(D.rows());
  Vector d = D.apply(beta);
  rec.add(0, beta, d, y, 0.0, start);
  for (Index k = 1; k <= cfg.max_steps; ++k) {
    start = Clock::now();
    const Vector s = sign_of(d);
    if (all_zero(s)) {
      path.status = StopReason::Stationary;
      break;
    }
    D.apply_transpose_add(-cfg.epsilon, s, beta);
    kernels::sign_step(cfg.epsilon, view(d), view(u));
    d = D.apply(beta);
    rec.add(k, beta, d, y, kernels::max_abs(view(u)), start);
  }
  if (!path.records.back().state) path.records.back().state = beta;
  path.final_state = std::move(beta);
  return path;
}

Path run_genlasso_dual(const GaussianSignalLoss& loss, const PenaltyMatrix& D,
                       const GenlassoConfig& cfg) {
  check_cfg(cfg);
  Path path = new_path(cfg);
  Recorder rec{cfg, path, cfg.record.stride(cfg.max_steps)};
  auto start = Clock::now();
  DualState st = dual_init(loss, D);
  Vector d = D.apply(st.beta);
  rec.add(0, st.beta, d, loss.y(), st.lambda, start);
  for (Index k = 1; k <= cfg.max_steps; ++k) {
    start = Clock::now();
    if (all_zero(d)) {
      path.status = StopReason::Stationary;
      break;
    }
    dual_step(st, st.beta, D, cfg.epsilon);
    st.beta = primal_recover(st.u, loss, D);
    d = D.apply(st.beta);
    rec.add(k, st.beta, d, loss.y(), st.lambda, start);
  }
  if (!path.records.back().state) path.records.back().state = st.beta;
  path.final_state = std::move(st.beta);
  return path;
}

}  // namespace stagewise
