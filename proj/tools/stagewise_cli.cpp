#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stagewise/frankwolfe.hpp"
#include "stagewise/harness.hpp"
#include "stagewise/io.hpp"

using namespace stagewise;

namespace {

enum Exit { kOk = 0, kInvalid = 2, kNumeric = 3, kIo = 4 };

struct Options {
  std::string scenario = "group_uncorr";
  std::uint64_t seed = 1;
  std::vector<double> epsilon;
  std::optional<double> alpha;
  std::optional<Index> steps;
  std::vector<double> t_grid;
  std::optional<double> gap_tol;
  std::string out = "out";
  Index reps = 1;
  Index threads = 1;
  bool no_timing = false;
  std::string image;
  Index fw_cap = 200;
  double gamma = 0.05;
  double m = 2.0;
  std::optional<double> t_max;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--scenario", o.scenario, "scenario name");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--epsilon", o.epsilon, "step sizes")->delimiter(',');
  cmd->add_option("--alpha", o.alpha, "shrinkage factor for shrunken stagewise");
  cmd->add_option("--steps", o.steps, "steps for the first epsilon");
  cmd->add_option("--t-grid", o.t_grid, "oracle t values")->delimiter(',');
  cmd->add_option("--gap-tol", o.gap_tol, "oracle duality gap tolerance");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--reps", o.reps, "repetitions");
  cmd->add_option("--threads", o.threads, "concurrent repetitions");
  cmd->add_flag("--no-timing", o.no_timing, "record zero wall times");
  cmd->add_option("--image", o.image, "PGM truth image for image2d");
}

ExperimentSpec make_spec(const Options& o) {
  const auto sc = parse_scenario(o.scenario);
  if (!sc) throw InputError("unknown scenario: " + o.scenario);
  ExperimentSpec s = ExperimentSpec::defaults(*sc);
  s.seed = o.seed;
  s.reps = o.reps;
  s.threads = o.threads;
  if (!o.epsilon.empty()) s.epsilons = o.epsilon;
  if (o.alpha) s.alpha = o.alpha;
  if (o.steps) s.steps = *o.steps;
  if (!o.t_grid.empty()) s.t_grid = o.t_grid;
  if (o.gap_tol) s.gap_tol = *o.gap_tol;
  if (!o.image.empty()) s.image = o.image;
  s.timing = !o.no_timing;
  s.validate();
  return s;
}

void print_summary(const Bundle& b) {
  std::printf("%-24s %14s %14s %12s %s\n", "method", "min_metric", "argmin_t", "estimates", "note");
  for (const auto& m : b.methods) {
    std::string note = m.error.empty() ? m.diagnostic : "error: " + m.error;
    std::printf("%-24s %14.6g %14.6g %12lld %s\n", m.name.c_str(), m.min_metric, m.argmin_t,
                static_cast<long long>(m.n_estimates), note.c_str());
  }
}

int cmd_run(const Options& o) {
  const ExperimentSpec s = make_spec(o);
  const Bundle b = run_experiment(s);
  emit(b, o.out);
  print_summary(b);
  return kOk;
}

int cmd_oracle(const Options& o) {
  ExperimentSpec s = make_spec(o);
  const Instance inst = generate(s, 0);
  if (inst.genlasso()) {
    if (s.t_grid.empty()) throw InputError("--t-grid is required for signal scenarios");
    std::vector<CertifiedSolution> sols;
    for (double t : s.t_grid) sols.push_back(genlasso_constrained(inst.y, *inst.D, t, s.gap_tol));
    std::filesystem::create_directories(o.out);
    io::write_certified_csv(sols, std::filesystem::path(o.out) / "oracle.csv", true);
    for (const auto& c : sols) std::printf("t=%.6g f=%.10g gap=%.3g\n", c.t, c.f, c.gap);
    return kOk;
  }
  if (!inst.reg->is_norm()) throw UnsupportedError("the constrained oracle needs a norm regularizer");
  if (s.t_grid.empty()) throw InputError("--t-grid is required");
  OracleOptions opts;
  opts.gap_tol = s.gap_tol;
  const OracleGrid grid = solve_grid(*inst.loss, *inst.reg, s.t_grid, opts);
  std::filesystem::create_directories(o.out);
  io::write_oracle_csv(grid, std::filesystem::path(o.out) / "oracle.csv", true);
  for (const auto& c : grid.solutions) {
    std::printf("t=%.6g f=%.10g gap=%.3g%s\n", c.t, c.f, c.gap, c.converged ? "" : " (unconverged)");
  }
  return grid.all_converged() ? kOk : kNumeric;
}

int cmd_compare(const Options& o) {
  ExperimentSpec s = make_spec(o);
  s.fw_cap = o.fw_cap;
  const Bundle b = run_experiment(s);
  emit(b, o.out);
  print_summary(b);
  return kOk;
}

int cmd_diagnose(const Options& o) {
  ExperimentSpec s = make_spec(o);
  const Instance inst = generate(s, 0);
  for (double e : s.epsilons) {
    const Index steps = std::max<Index>(1, static_cast<Index>(s.steps * s.epsilons.front() / e));
    const Path p = run_instance(inst, s, e, steps, 1.0);
    const DiagnosticReport r = step_size_diagnostic(p);
    std::printf("eps=%g status=%s", e, diagnostic_name(r.status));
    if (r.first_failure) std::printf(" first_failure=%lld", static_cast<long long>(*r.first_failure));
    if (r.alternating_run > 0) std::printf(" run=%lld", static_cast<long long>(r.alternating_run));
    if (r.status != DiagnosticReport::Status::Clean) std::printf(" (%s)", r.recommendation.c_str());
    std::printf("\n");
  }
  return kOk;
}

int cmd_fw_path(const Options& o) {
  ExperimentSpec s = make_spec(o);
  const Instance inst = generate(s, 0);
  if (inst.genlasso() || !inst.reg->is_norm()) {
    throw UnsupportedError("fw-path needs a norm regularizer");
  }
  double t_max = o.t_max.value_or(0.0);
  if (t_max <= 0.0) {
    const Path p = run_instance(inst, s, s.epsilons.front(), s.steps, 1.0);
    t_max = p.back().t;
  }
  const FWPath path = fw_path_follow(*inst.loss, *inst.reg, o.gamma, o.m, 0.0, t_max);
  std::filesystem::create_directories(o.out);
  io::write_certified_csv(path.breakpoints, std::filesystem::path(o.out) / "fw_path.csv", true);
  std::printf("breakpoints=%zu covered_to=%.6g reached_optimum=%d all_converged=%d\n",
              path.breakpoints.size(), path.covered_to, path.reached_optimum ? 1 : 0,
              path.all_converged ? 1 : 0);
  return path.all_converged ? kOk : kNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stagewise regularization paths"};
  app.require_subcommand(1);
  Options o;
  auto* run = app.add_subcommand("run", "stagewise paths, oracle grid, curves and summary");
  auto* oracle = app.add_subcommand("oracle", "certified constrained solutions on a t grid");
  auto* compare = app.add_subcommand("compare", "run plus Frank-Wolfe with an iteration cap");
  auto* diagnose = app.add_subcommand("diagnose", "step-size diagnostic for each epsilon");
  auto* fw = app.add_subcommand("fw-path", "Frank-Wolfe path following");
  for (auto* c : {run, oracle, compare, diagnose, fw}) add_common(c, o);
  compare->add_option("--fw-cap", o.fw_cap, "Frank-Wolfe iteration cap");
  fw->add_option("--gamma", o.gamma, "suboptimality target");
  fw->add_option("--m", o.m, "tolerance divisor (> 1)");
  fw->add_option("--t-max", o.t_max, "end of the path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) return cmd_run(o);
    if (*oracle) return cmd_oracle(o);
    if (*compare) return cmd_compare(o);
    if (*diagnose) return cmd_diagnose(o);
    if (*fw) return cmd_fw_path(o);
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kInvalid;
  }
  return kOk;
}
