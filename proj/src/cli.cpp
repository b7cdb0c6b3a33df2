#include "phasels/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "phasels/errors.hpp"
#include "phasels/geometry.hpp"
#include "phasels/harness.hpp"
#include "phasels/random.hpp"
#include "phasels/run_config.hpp"
#include "phasels/solvers.hpp"

namespace phasels {

namespace {

// Distinguishes config/flag problems (exit 2) from runtime failures (exit 1).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string Full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Collects PASS/FAIL lines and remembers whether anything failed.
class CheckReport {
 public:
  explicit CheckReport(std::ostream& out) : out_(out) {}
  void Add(bool ok, const std::string& what) {
    out_ << (ok ? "PASS " : "FAIL ") << what << '\n';
    all_ok_ = all_ok_ && ok;
  }
  int ExitCode() const { return all_ok_ ? kExitOk : kExitFailure; }

 private:
  std::ostream& out_;
  bool all_ok_ = true;
};

std::vector<std::string> SolverNames() {
  std::vector<std::string> names;
  for (auto k : {SolverKind::kErrorReduction, SolverKind::kAmplitudeGradient,
                 SolverKind::kConstrainedLasso, SolverKind::kRegularizedLasso, SolverKind::kLinearLs,
                 SolverKind::kLinearLassoConstrained, SolverKind::kLinearLassoRegularized}) {
    names.emplace_back(SolverName(k));
  }
  return names;
}

double ParseDouble(const std::string& text, const std::string& flag) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("bad value '" + text + "' for " + flag);
}

LambdaRule ParseLambdaFlag(const std::string& text) {
  auto with_constant = [&](LambdaRule::Kind kind, const std::string& prefix) {
    LambdaRule rule{kind, 1.0};
    if (text.size() > prefix.size()) {
      if (text[prefix.size()] != ':') throw UsageError("bad value '" + text + "' for --lambda");
      rule.value = ParseDouble(text.substr(prefix.size() + 1), "--lambda");
    }
    return rule;
  };
  if (text.rfind("paper", 0) == 0) return with_constant(LambdaRule::Kind::kPaper, "paper");
  if (text.rfind("conjecture", 0) == 0) {
    return with_constant(LambdaRule::Kind::kConjecture, "conjecture");
  }
  return {LambdaRule::Kind::kFixed, ParseDouble(text, "--lambda")};
}

RadiusRule ParseRadiusFlag(const std::string& text) {
  if (text == "oracle" || text == "oracle_l1_norm") return {RadiusRule::Kind::kOracleL1Norm, 0.0};
  return {RadiusRule::Kind::kFixed, ParseDouble(text, "--R")};
}

std::string Sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    out += keep ? c : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

// ---- solve -----------------------------------------------------------------

struct SolveArgs {
  int m = 0;
  int d = 0;
  int s = 0;
  std::string noise = "zero";
  std::string solver = "error_reduction";
  std::uint64_t seed = 0;
  std::string lambda;
  std::string radius;
  std::string out;
  int restarts = 5;
  int max_iters = 1000;
  double x0_norm = 1.0;
};

int CmdSolve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  plan.m_values = {args.m};
  plan.d_values = {args.d};
  if (args.s > 0) plan.s_values = std::vector<int>{args.s};
  plan.solver = ParseSolverKind(args.solver);
  plan.master_seed = args.seed;
  plan.restarts = args.restarts;
  plan.max_iters = args.max_iters;
  plan.x0_norm = args.x0_norm;
  try {
    plan.noise = ParseNoiseSpec(args.noise);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (IsRegularizedSolver(plan.solver)) {
    plan.lambda_rule = args.lambda.empty() ? LambdaRule{} : ParseLambdaFlag(args.lambda);
  } else if (!args.lambda.empty()) {
    throw UsageError("--lambda applies only to regularized solvers");
  }
  if (IsConstrainedSolver(plan.solver)) {
    plan.radius_rule = args.radius.empty() ? RadiusRule{} : ParseRadiusFlag(args.radius);
  } else if (!args.radius.empty()) {
    throw UsageError("--R applies only to constrained solvers");
  }
  try {
    ValidatePlan(plan);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const ExperimentRecord record = RunTrial(plan, {args.m, args.d, args.s}, 0);
  if (args.out.empty()) {
    WriteRecords({record}, out);
  } else {
    WriteRecords({record}, std::filesystem::path(args.out));
  }
  (void)err;
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

int CmdSweep(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = LoadRunConfig(config_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const SweepResult sweep = RunSweep(cfg.plan, {cfg.threads});
  for (const auto& f : sweep.failures) {
    err << "trial failed (m=" << f.point.m << " d=" << f.point.d << " s=" << f.point.s
        << " trial=" << f.trial << "): " << f.message << '\n';
  }
  WriteRecords(sweep.records, cfg.records_path);
  if (sweep.records.empty()) {
    err << "no records produced\n";
    return kExitFailure;
  }
  EmitPlotData(sweep.records, GroupBy::kM, Statistic::kMedian, cfg.plots_path);
  try {
    const SlopeFit fit = FitLogLog(sweep.records, GroupBy::kM, Statistic::kMedian);
    out << "slope=" << Full(fit.slope) << " r2=" << Full(fit.r_squared) << '\n';
  } catch (const Error& e) {
    out << "slope=nan r2=nan\n";
    err << "slope fit unavailable: " << e.what() << '\n';
  }
  return kExitOk;
}

// ---- check -----------------------------------------------------------------

int CheckFTheta(int grid, std::ostream& out) {
  CheckReport report(out);
  const double f0 = FTheta(0.0);
  report.Add(std::abs(f0) <= 1e-12, "f(0) = 0 (got " + Full(f0) + ")");
  const double fpi2 = FTheta(std::numbers::pi / 2);
  report.Add(std::abs(fpi2 - 2 / std::numbers::pi) <= 1e-12,
             "f(pi/2) = 2/pi (got " + Full(fpi2) + ")");
  bool monotone = true;
  bool nonnegative = true;
  double prev = FTheta(0.0);
  for (int k = 0; k <= grid; ++k) {
    const double f = FTheta(std::numbers::pi / 2 * k / grid);
    nonnegative = nonnegative && f >= 0.0;
    monotone = monotone && f >= prev;
    prev = f;
  }
  report.Add(nonnegative, "f >= 0 on a " + std::to_string(grid + 1) + "-point grid of [0, pi/2]");
  report.Add(monotone,
             "f nondecreasing on a " + std::to_string(grid + 1) + "-point grid of [0, pi/2]");
  double worst = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double t = std::numbers::pi / 2 * k / grid;
    worst = std::max(worst, std::abs(FTheta(t) + std::abs(std::cos(t)) - ExpectedAbsXiClosedForm(t)));
  }
  report.Add(worst <= 1e-12, "f + |cos| matches the closed form of E|xi| (max gap " + Fmt(worst) + ")");
  return report.ExitCode();
}

int CheckXi(double theta, std::int64_t samples, std::uint64_t seed, double k, std::ostream& out) {
  CheckReport report(out);
  const McEstimate mc = ExpectedAbsXi(theta, samples, seed);
  const double target = FTheta(theta) + std::abs(std::cos(theta));
  const double gap = std::abs(mc.estimate - target);
  report.Add(gap <= k * mc.std_error,
             "|estimate - (f + |cos|)| <= " + Fmt(k) + " stderr (estimate=" + Fmt(mc.estimate) +
                 " target=" + Fmt(target) + " stderr=" + Fmt(mc.std_error) + ")");
  return report.ExitCode();
}

int CheckSrip(int m, int d, int s, std::uint64_t seed, const std::string& mode,
              std::int64_t budget, std::ostream& out) {
  CheckReport report(out);
  const MeasurementSet a = GenGaussianMatrix(m, d, seed);
  const SripMode srip_mode = mode == "sampled" ? SripMode::kSampled : SripMode::kExhaustive;
  const std::uint64_t sample_seed = DeriveSeed(seed, "srip", {});
  const SripEstimate est = SripConstants(a, s, srip_mode, budget, sample_seed);
  out << "# theta_minus=" << Full(est.theta_minus) << " theta_plus=" << Full(est.theta_plus)
      << " subsets=" << est.subsets_evaluated << " directions=" << est.directions_evaluated << '\n';
  report.Add(est.theta_minus > 0.0, "theta_minus > 0");
  report.Add(est.theta_minus <= est.theta_plus, "theta_minus <= theta_plus");
  const SripEstimate again = SripConstants(a, s, srip_mode, budget, sample_seed);
  report.Add(again.theta_minus == est.theta_minus && again.theta_plus == est.theta_plus,
             "repeat evaluation is bit-identical");
  if (srip_mode == SripMode::kExhaustive) {
    std::vector<int> perm(m);
    for (int i = 0; i < m; ++i) perm[i] = i;
    Rng rng(DeriveSeed(seed, "permute", {}));
    for (int i = m - 1; i > 0; --i) std::swap(perm[i], perm[rng.Below(i + 1)]);
    MeasurementSet permuted = a;
    for (int i = 0; i < m; ++i) permuted.entries.row(i) = a.entries.row(perm[i]);
    const SripEstimate p = SripConstants(permuted, s, srip_mode, budget, sample_seed);
    const bool same = std::abs(p.theta_minus - est.theta_minus) <= 1e-12 &&
                      std::abs(p.theta_plus - est.theta_plus) <= 1e-12;
    report.Add(same, "invariant under row permutation");
  }
  return report.ExitCode();
}

int CheckWidth(const std::string& set_name, int d, int s, std::int64_t samples,
               std::uint64_t seed, std::ostream& out) {
  CheckReport report(out);
  WidthSet set = WidthSet::Sphere(d);
  if (set_name == "l1") set = WidthSet::L1Ball(d);
  if (set_name == "kds") set = WidthSet::Kds(d, s);
  const WidthEstimate w = GaussianWidth(set, samples, seed);
  out << "# width=" << Full(w.mean) << " stderr=" << Full(w.std_error) << " samples=" << w.samples
      << '\n';
  report.Add(std::isfinite(w.mean) && w.std_error >= 0.0, "estimate is finite");

  if (set.kind == WidthSet::Kind::kSphere) {
    report.Add(w.mean <= std::sqrt(static_cast<double>(d)) + 3 * w.std_error,
               "width <= sqrt(d) (Jensen bound)");
    if (d == 1) {
      const double exact = std::sqrt(2 / std::numbers::pi);
      report.Add(std::abs(w.mean - exact) <= 3 * w.std_error,
                 "within 3 stderr of sqrt(2/pi) = " + Fmt(exact));
    }
  } else if (set.kind == WidthSet::Kind::kL1Ball) {
    // independent estimator: plain max |g_i| with its own stream
    Rng rng(DeriveSeed(seed, "independent", {}));
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t k = 0; k < samples; ++k) {
      double mx = 0.0;
      for (int i = 0; i < d; ++i) mx = std::max(mx, std::abs(rng.Normal()));
      const double delta = mx - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (mx - mean);
    }
    const double se = std::sqrt(m2 / static_cast<double>(samples - 1) / samples);
    const double tol = 3 * std::hypot(se, w.std_error);
    report.Add(std::abs(mean - w.mean) <= tol,
               "within 3 combined stderr of an independent max|g_i| estimate (" + Fmt(mean) + ")");
  } else {
    Rng rng(seed);
    bool sandwich = true;
    bool feasible = true;
    const std::int64_t checked = std::min<std::int64_t>(samples, 100);
    for (std::int64_t k = 0; k < checked; ++k) {
      Vector g(d);
      for (int i = 0; i < d; ++i) g[i] = rng.Normal();
      const KdsMaximizer mx = MaximizeOverKds(g, s);
      feasible = feasible && mx.x.norm() <= 1 + 1e-9 &&
                 mx.x.lpNorm<1>() <= std::sqrt(static_cast<double>(s)) + 1e-9;
      Vector sorted = g.cwiseAbs();
      std::sort(sorted.data(), sorted.data() + d, std::greater<>());
      const double lower = sorted.head(s).norm();
      const double upper = std::min(g.norm(), std::sqrt(static_cast<double>(s)) * sorted[0]);
      sandwich = sandwich && mx.value >= lower - 1e-9 && mx.value <= upper + 1e-9;
    }
    report.Add(feasible, "maximizers lie in K_{d,s} (" + std::to_string(checked) + " draws)");
    report.Add(sandwich, "top-s norm <= support value <= min(||g||, sqrt(s) max|g_i|) (" +
                             std::to_string(checked) + " draws)");
  }
  return report.ExitCode();
}

int CheckFixedPoint(int m, int d, std::uint64_t seed, const std::string& noise_text, int trials,
                    std::ostream& out) {
  CheckReport report(out);
  NoiseSpec spec;
  try {
    spec = ParseNoiseSpec(noise_text);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  double worst_truth = 0.0;
  for (int t = 0; t < trials; ++t) {
    const MeasurementSet a = GenGaussianMatrix(m, d, DeriveSeed(seed, "matrix", {static_cast<std::uint64_t>(t)}));
    const Signal x0 = GenSignal(d, std::nullopt, 1.0, DeriveSeed(seed, "signal", {static_cast<std::uint64_t>(t)}));
    const Vector y = (a.entries * x0.values).cwiseAbs();
    worst_truth = std::max({worst_truth, FixedPointResidual(a, y, x0.values),
                            FixedPointResidual(a, y, Vector(-x0.values))});
  }
  report.Add(worst_truth <= 1e-10, "noiseless x0 and -x0 are fixed points (max residual " +
                                       Fmt(worst_truth) + ")");

  ExperimentPlan plan;
  plan.m_values = {m};
  plan.d_values = {d};
  plan.noise = spec;
  plan.solver = SolverKind::kErrorReduction;
  plan.master_seed = seed;
  int converged = 0;
  int certified = 0;
  for (int t = 0; t < trials; ++t) {
    const TrialOutcome o = RunTrialDetailed(plan, {m, d, 0}, t);
    if (!o.result.converged) continue;
    ++converged;
    if (o.result.fixed_point_residual <= 1e-6 * (1 + o.result.x_hat.norm())) ++certified;
  }
  report.Add(converged > 0 && certified == converged,
             "converged outputs satisfy residual <= 1e-6 (1 + ||x||) (" +
                 std::to_string(certified) + "/" + std::to_string(converged) + " converged of " +
                 std::to_string(trials) + ")");
  return report.ExitCode();
}

// ---- report ----------------------------------------------------------------

int CmdReport(const std::string& records_path, const std::string& out_dir, std::ostream& out,
              std::ostream& err) {
  std::vector<ExperimentRecord> records;
  std::error_code ec;
  if (std::filesystem::is_regular_file(records_path, ec) &&
      std::filesystem::file_size(records_path, ec) == 0) {
    throw UsageError("no records in '" + records_path + "' (empty file)");
  }
  try {
    records = ReadRecords(records_path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (records.empty()) throw UsageError("no records in '" + records_path + "'");
  std::filesystem::create_directories(out_dir);

  std::map<std::pair<std::string, std::string>, std::vector<ExperimentRecord>> groups;
  for (const auto& r : records) groups[{r.solver, r.noise_kind}].push_back(r);

  std::ostringstream summary;
  for (const auto& [key, group] : groups) {
    const auto& [solver, noise_kind] = key;
    const std::string stem = Sanitize(solver) + "__" + Sanitize(noise_kind);
    const auto plot_path = std::filesystem::path(out_dir) / (stem + ".dat");
    EmitPlotData(group, GroupBy::kM, Statistic::kMedian, plot_path);

    summary << "solver=" << solver << " noise=" << noise_kind << " records=" << group.size()
            << " plot=" << plot_path.filename().string() << '\n';
    summary << "  m median_dist min_dist trials\n";
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto& g : SummarizeGroups(group, GroupBy::kM, Statistic::kMedian)) {
      summary << "  " << g.x << ' ' << Fmt(g.value) << ' ' << Fmt(g.min) << ' ' << g.count << '\n';
      min_dist = std::min(min_dist, g.min);
    }
    try {
      const SlopeFit fit = FitLogLog(group, GroupBy::kM, Statistic::kMedian);
      summary << "  slope=" << Fmt(fit.slope) << " r2=" << Fmt(fit.r_squared)
              << " slope_stderr=" << Fmt(fit.slope_stderr) << '\n';
    } catch (const Error& e) {
      summary << "  slope=n/a (" << e.what() << ")\n";
    }
    summary << "  min_dist=" << Fmt(min_dist) << "\n\n";
  }
  const auto summary_path = std::filesystem::path(out_dir) / "summary.txt";
  std::ofstream file(summary_path);
  if (!file) Fail(ErrorCode::kIo, "cannot write '" + summary_path.string() + "'");
  file << summary.str();
  out << summary.str();
  (void)err;
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"phasels: phase retrieval by nonlinear least squares"};
  app.name("phasels");
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run one trial and print its record as CSV");
  solve_cmd->add_option("--m", solve.m, "Number of measurements")->required();
  solve_cmd->add_option("--d", solve.d, "Signal dimension")->required();
  solve_cmd->add_option("--s", solve.s, "Sparsity (0 = dense)");
  solve_cmd->add_option("--noise", solve.noise, "zero | iid_gaussian:s | fixed_norm:nu | constant:c")
      ->capture_default_str();
  solve_cmd->add_option("--solver", solve.solver, "Solver name")
      ->check(CLI::IsMember(SolverNames()))
      ->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed, "Master seed")->required();
  auto* lambda_opt =
      solve_cmd->add_option("--lambda", solve.lambda, "paper[:c] | conjecture[:c] | <value>");
  solve_cmd->add_option("--R", solve.radius, "oracle | <value>")->excludes(lambda_opt);
  solve_cmd->add_option("--out", solve.out, "Write the CSV here instead of stdout");
  solve_cmd->add_option("--restarts", solve.restarts, "Solver restarts")->capture_default_str();
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration cap")->capture_default_str();
  solve_cmd->add_option("--x0-norm", solve.x0_norm, "Norm of the true signal")
      ->capture_default_str();

  std::string config_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a sweep from a config file");
  sweep_cmd->add_option("config", config_path, "Config file")->required();

  auto* check_cmd = app.add_subcommand("check", "Run a validator suite");
  check_cmd->require_subcommand(1);

  int ftheta_grid = 10000;
  auto* ftheta_cmd = check_cmd->add_subcommand("ftheta", "Identities of f(theta)");
  ftheta_cmd->add_option("--grid", ftheta_grid, "Grid intervals on [0, pi/2]")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  double xi_theta = 0.0;
  std::int64_t xi_samples = 100000;
  std::uint64_t xi_seed = 1;
  double xi_k = 3.0;
  auto* xi_cmd = check_cmd->add_subcommand("xi", "Monte Carlo E|xi| against its closed form");
  xi_cmd->add_option("--theta", xi_theta)->check(CLI::Range(0.0, std::numbers::pi))
      ->capture_default_str();
  xi_cmd->add_option("--samples", xi_samples)->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))
      ->capture_default_str();
  xi_cmd->add_option("--seed", xi_seed)->capture_default_str();
  xi_cmd->add_option("--k", xi_k, "Tolerance in standard errors")->capture_default_str();

  int srip_m = 12, srip_d = 4, srip_s = 1;
  std::uint64_t srip_seed = 5;
  std::string srip_mode = "exhaustive";
  std::int64_t srip_budget = 20000;
  auto* srip_cmd = check_cmd->add_subcommand("srip", "Restricted-isometry constants");
  srip_cmd->add_option("--m", srip_m)->capture_default_str();
  srip_cmd->add_option("--d", srip_d)->capture_default_str();
  srip_cmd->add_option("--s", srip_s)->capture_default_str();
  srip_cmd->add_option("--seed", srip_seed)->capture_default_str();
  srip_cmd->add_option("--mode", srip_mode)
      ->check(CLI::IsMember({"exhaustive", "sampled"}))
      ->capture_default_str();
  srip_cmd->add_option("--budget", srip_budget, "Draws in sampled mode")->capture_default_str();

  std::string width_set = "sphere";
  int width_d = 1, width_s = 1;
  std::int64_t width_samples = 100000;
  std::uint64_t width_seed = 1;
  auto* width_cmd = check_cmd->add_subcommand("width", "Gaussian width estimates");
  width_cmd->add_option("--set", width_set)
      ->check(CLI::IsMember({"sphere", "l1", "kds"}))
      ->capture_default_str();
  width_cmd->add_option("--d", width_d)->check(CLI::PositiveNumber)->capture_default_str();
  width_cmd->add_option("--s", width_s)->check(CLI::PositiveNumber)->capture_default_str();
  width_cmd->add_option("--samples", width_samples)
      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40))
      ->capture_default_str();
  width_cmd->add_option("--seed", width_seed)->capture_default_str();

  int fp_m = 80, fp_d = 10, fp_trials = 5;
  std::uint64_t fp_seed = 1;
  std::string fp_noise = "fixed_norm:1";
  auto* fp_cmd = check_cmd->add_subcommand("fixed-point", "Fixed-point certification");
  fp_cmd->add_option("--m", fp_m)->capture_default_str();
  fp_cmd->add_option("--d", fp_d)->capture_default_str();
  fp_cmd->add_option("--seed", fp_seed)->capture_default_str();
  fp_cmd->add_option("--noise", fp_noise)->capture_default_str();
  fp_cmd->add_option("--trials", fp_trials)->check(CLI::PositiveNumber)->capture_default_str();

  std::string report_records, report_dir;
  auto* report_cmd = app.add_subcommand("report", "Summarize a records CSV");
  report_cmd->add_option("records", report_records, "Records CSV")->required();
  report_cmd->add_option("out_dir", report_dir, "Output directory")->required();

  int gm_m = 0, gm_d = 0;
  std::uint64_t gm_seed = 0;
  std::string gm_out;
  auto* gm_cmd = app.add_subcommand("gen-matrix", "Write a Gaussian matrix in PRBM format");
  gm_cmd->add_option("--m", gm_m)->required();
  gm_cmd->add_option("--d", gm_d)->required();
  gm_cmd->add_option("--seed", gm_seed)->required();
  gm_cmd->add_option("--out", gm_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : {solve_cmd, sweep_cmd, check_cmd, report_cmd, gm_cmd}) {
      if (sub->parsed()) failing = sub;
    }
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (*solve_cmd) return CmdSolve(solve, out, err);
    if (*sweep_cmd) return CmdSweep(config_path, out, err);
    if (*report_cmd) return CmdReport(report_records, report_dir, out, err);
    if (*gm_cmd) {
      WriteMatrix(GenGaussianMatrix(gm_m, gm_d, gm_seed), gm_out);
      return kExitOk;
    }
    if (*ftheta_cmd) return CheckFTheta(ftheta_grid, out);
    if (*xi_cmd) return CheckXi(xi_theta, xi_samples, xi_seed, xi_k, out);
    if (*srip_cmd) {
      return CheckSrip(srip_m, srip_d, srip_s, srip_seed, srip_mode, srip_budget, out);
    }
    if (*width_cmd) {
      return CheckWidth(width_set, width_d, width_s, width_samples, width_seed, out);
    }
    if (*fp_cmd) return CheckFixedPoint(fp_m, fp_d, fp_seed, fp_noise, fp_trials, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool usage = e.code() == ErrorCode::kInvalidDimension ||
                       e.code() == ErrorCode::kInvalidSparsity ||
                       e.code() == ErrorCode::kInvalidArgument || e.code() == ErrorCode::kParse;
    return usage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, out, err);
}

}  // namespace phasels
