#include "phasels/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "phasels/errors.hpp"
#include "phasels/random.hpp"

namespace phasels {

namespace {

struct SolverEntry {
  SolverKind kind;
  const char* name;
};

constexpr SolverEntry kSolvers[] = {
    {SolverKind::kErrorReduction, "error_reduction"},
    {SolverKind::kAmplitudeGradient, "amplitude_gradient"},
    {SolverKind::kConstrainedLasso, "constrained_lasso"},
    {SolverKind::kRegularizedLasso, "regularized_lasso"},
    {SolverKind::kLinearLs, "linear_ls"},
    {SolverKind::kLinearLassoConstrained, "linear_lasso_constrained"},
    {SolverKind::kLinearLassoRegularized, "linear_lasso_regularized"},
};

std::string Where(const GridPoint& p, int trial) {
  return "[m=" + std::to_string(p.m) + " d=" + std::to_string(p.d) + " s=" + std::to_string(p.s) +
         " trial=" + std::to_string(trial) + "]";
}

auto GridKey(const ExperimentRecord& r) { return std::tuple(r.m, r.d, r.s, r.trial); }

}  // namespace

const char* SolverName(SolverKind kind) {
  for (const auto& e : kSolvers) {
    if (e.kind == kind) return e.name;
  }
  return "unknown";
}

SolverKind ParseSolverKind(const std::string& name) {
  for (const auto& e : kSolvers) {
    if (name == e.name) return e.kind;
  }
  Fail(ErrorCode::kParse, "unknown solver '" + name + "'");
}

bool IsConstrainedSolver(SolverKind kind) {
  return kind == SolverKind::kConstrainedLasso || kind == SolverKind::kLinearLassoConstrained;
}

bool IsRegularizedSolver(SolverKind kind) {
  return kind == SolverKind::kRegularizedLasso || kind == SolverKind::kLinearLassoRegularized;
}

bool IsSparseSolver(SolverKind kind) {
  return IsConstrainedSolver(kind) || IsRegularizedSolver(kind);
}

bool IsLinearModelSolver(SolverKind kind) {
  return kind == SolverKind::kLinearLs || kind == SolverKind::kLinearLassoConstrained ||
         kind == SolverKind::kLinearLassoRegularized;
}

void ValidatePlan(const ExperimentPlan& plan) {
  auto bad = [](const std::string& what) { Fail(ErrorCode::kInvalidArgument, "plan: " + what); };
  if (plan.d_values.empty()) bad("d_values is empty");
  if (plan.m_values.empty()) bad("m_values is empty");
  for (int d : plan.d_values) {
    if (d < 1) bad("d values must be >= 1");
  }
  for (int m : plan.m_values) {
    if (m < 1) bad("m values must be >= 1");
  }
  if (plan.trials < 1) bad("trials must be >= 1");
  if (!(plan.x0_norm >= 0.0)) bad("x0_norm must be >= 0");
  if (plan.restarts < 1) bad("restarts must be >= 1");
  if (plan.max_iters < 1) bad("max_iters must be >= 1");
  if (IsSparseSolver(plan.solver) && (!plan.s_values || plan.s_values->empty())) {
    bad(std::string("solver ") + SolverName(plan.solver) + " requires s_values");
  }
  if (plan.s_values) {
    for (int s : *plan.s_values) {
      for (int d : plan.d_values) {
        if (s < 1 || s > d) {
          bad("sparsity " + std::to_string(s) + " outside [1, d = " + std::to_string(d) + "]");
        }
      }
    }
  }
  if (IsConstrainedSolver(plan.solver) && !plan.radius_rule) {
    bad(std::string("solver ") + SolverName(plan.solver) + " requires an R rule");
  }
  if (IsRegularizedSolver(plan.solver) && !plan.lambda_rule) {
    bad(std::string("solver ") + SolverName(plan.solver) + " requires a lambda rule");
  }
}

std::uint64_t TrialSeed(std::uint64_t master_seed, const GridPoint& point, int trial_index) {
  return DeriveSeed(master_seed, "trial",
                    {static_cast<std::uint64_t>(point.m), static_cast<std::uint64_t>(point.d),
                     static_cast<std::uint64_t>(point.s),
                     static_cast<std::uint64_t>(trial_index)});
}

TrialOutcome RunTrialDetailed(const ExperimentPlan& plan, const GridPoint& point,
                              int trial_index) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = TrialSeed(plan.master_seed, point, trial_index);
  TrialOutcome out;
  try {
    const std::optional<int> sparsity = point.s > 0 ? std::optional<int>(point.s) : std::nullopt;
    out.x0 = GenSignal(point.d, sparsity, plan.x0_norm, DeriveSeed(seed, "signal"));
    const MeasurementSet a = GenGaussianMatrix(point.m, point.d, DeriveSeed(seed, "matrix"));
    out.eta = GenNoise(plan.noise, point.m, DeriveSeed(seed, "noise"));
    const bool linear = IsLinearModelSolver(plan.solver);
    const Observation obs = Observe(
        a, out.x0, out.eta, linear ? ObservationModel::kLinear : ObservationModel::kPhaseless);

    SolverConfig config;
    config.max_iters = plan.max_iters;
    config.tol = plan.tol;
    config.restarts = plan.restarts;
    config.seed = DeriveSeed(seed, "solver");
    config.init = linear ? SolverInit::Given(Vector::Zero(point.d)) : SolverInit::Spectral();
    if (IsSparseSolver(plan.solver) && !linear) config.spectral_support = point.s;

    ExperimentRecord& rec = out.record;
    if (plan.radius_rule && IsConstrainedSolver(plan.solver)) {
      rec.R = plan.radius_rule->kind == RadiusRule::Kind::kOracleL1Norm
                  ? out.x0.values.lpNorm<1>()
                  : plan.radius_rule->value;
    }
    if (plan.lambda_rule && IsRegularizedSolver(plan.solver)) {
      const LambdaRule& rule = *plan.lambda_rule;
      switch (rule.kind) {
        case LambdaRule::Kind::kPaper: rec.lambda = ComputeLambda(out.eta, point.d, rule.value); break;
        case LambdaRule::Kind::kConjecture:
          rec.lambda = ComputeLambdaConjecture(out.eta, point.d, rule.value);
          break;
        case LambdaRule::Kind::kFixed: rec.lambda = rule.value; break;
      }
    }

    switch (plan.solver) {
      case SolverKind::kErrorReduction: out.result = ErrorReduction(a, obs.y, config); break;
      case SolverKind::kAmplitudeGradient: out.result = AmplitudeGradient(a, obs.y, config); break;
      case SolverKind::kConstrainedLasso:
        out.result = ConstrainedLassoSolve(a, obs.y, *rec.R, Loss::kAmplitude, config);
        break;
      case SolverKind::kRegularizedLasso:
        out.result = RegularizedLassoSolve(a, obs.y, *rec.lambda, Loss::kAmplitude, config);
        break;
      case SolverKind::kLinearLs: out.result = LinearLeastSquares(a, obs.y); break;
      case SolverKind::kLinearLassoConstrained:
        out.result = ConstrainedLassoSolve(a, obs.y, *rec.R, Loss::kLinear, config);
        break;
      case SolverKind::kLinearLassoRegularized:
        out.result = RegularizedLassoSolve(a, obs.y, *rec.lambda, Loss::kLinear, config);
        break;
    }

    rec.trial = trial_index;
    rec.m = point.m;
    rec.d = point.d;
    rec.s = point.s;
    rec.noise_kind = NoiseLabel(plan.noise);
    rec.eta_norm = out.eta.norm();
    rec.eta_l1 = out.eta.lpNorm<1>();
    rec.mean_eta = out.eta.mean();
    rec.solver = SolverName(plan.solver);
    rec.dist = DistSign(out.result.x_hat, out.x0.values);
    rec.objective = out.result.objective;
    rec.iterations = out.result.iterations;
    rec.converged = out.result.converged;
    rec.seed = seed;
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " " + Where(point, trial_index));
  }
  out.record.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ExperimentRecord RunTrial(const ExperimentPlan& plan, const GridPoint& point, int trial_index) {
  return RunTrialDetailed(plan, point, trial_index).record;
}

std::vector<GridPoint> ExpandGrid(const ExperimentPlan& plan) {
  std::set<std::tuple<int, int, int>> keys;
  const std::vector<int> dense{0};
  const std::vector<int>& s_values = plan.s_values ? *plan.s_values : dense;
  for (int m : plan.m_values) {
    for (int d : plan.d_values) {
      for (int s : s_values) keys.emplace(m, d, s);
    }
  }
  std::vector<GridPoint> grid;
  for (const auto& [m, d, s] : keys) grid.push_back({m, d, s});
  return grid;
}

SweepResult RunSweep(const ExperimentPlan& plan, const SweepOptions& options) {
  ValidatePlan(plan);
  const auto grid = ExpandGrid(plan);
  struct Task {
    GridPoint point;
    int trial;
  };
  std::vector<Task> tasks;
  for (const auto& p : grid) {
    for (int t = 0; t < plan.trials; ++t) tasks.push_back({p, t});
  }

  std::vector<std::optional<ExperimentRecord>> slots(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        slots[i] = RunTrial(plan, tasks[i].point, tasks[i].trial);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  int threads = options.threads > 0 ? options.threads
                                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SweepResult out;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (slots[i]) {
      out.records.push_back(std::move(*slots[i]));
    } else {
      out.failures.push_back({tasks[i].point, tasks[i].trial, errors[i]});
    }
  }
  if (out.failures.size() * 10 > tasks.size()) {
    Fail(ErrorCode::kTrial, "sweep failed: " + std::to_string(out.failures.size()) + " of " +
                                std::to_string(tasks.size()) +
                                " trials errored; first: " + out.failures.front().message);
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const auto& a, const auto& b) { return GridKey(a) < GridKey(b); });
  return out;
}

GroupBy ParseGroupBy(const std::string& name) {
  if (name == "m") return GroupBy::kM;
  if (name == "d") return GroupBy::kD;
  if (name == "s") return GroupBy::kS;
  Fail(ErrorCode::kParse, "unknown group-by field '" + name + "' (expected m, d or s)");
}

const char* GroupByName(GroupBy g) {
  switch (g) {
    case GroupBy::kM: return "m";
    case GroupBy::kD: return "d";
    case GroupBy::kS: return "s";
  }
  return "?";
}

Statistic ParseStatistic(const std::string& name) {
  if (name == "median") return Statistic::kMedian;
  if (name == "mean") return Statistic::kMean;
  Fail(ErrorCode::kParse, "unknown statistic '" + name + "' (expected median or mean)");
}

const char* StatisticName(Statistic s) { return s == Statistic::kMedian ? "median" : "mean"; }

double Median(std::vector<double> values) {
  if (values.empty()) Fail(ErrorCode::kInvalidArgument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<GroupSummary> SummarizeGroups(const std::vector<ExperimentRecord>& records,
                                          GroupBy group_by, Statistic statistic) {
  std::map<int, std::vector<double>> groups;
  for (const auto& r : records) {
    const int key = group_by == GroupBy::kM ? r.m : group_by == GroupBy::kD ? r.d : r.s;
    groups[key].push_back(r.dist);
  }
  std::vector<GroupSummary> out;
  for (auto& [key, dists] : groups) {
    // fixed summation order so the statistic does not depend on record order
    std::sort(dists.begin(), dists.end());
    GroupSummary g;
    g.x = key;
    g.count = static_cast<int>(dists.size());
    const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / g.count;
    g.value = statistic == Statistic::kMedian ? Median(dists) : mean;
    g.min = dists.front();
    if (g.count > 1) {
      double ss = 0.0;
      for (double v : dists) ss += (v - mean) * (v - mean);
      g.std_error = std::sqrt(ss / (g.count - 1)) / std::sqrt(static_cast<double>(g.count));
    }
    out.push_back(g);
  }
  return out;
}

SlopeFit FitLogLog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) Fail(ErrorCode::kLengthMismatch, "FitLogLog: x and y lengths differ");
  if (x.size() < 2) Fail(ErrorCode::kInvalidArgument, "FitLogLog: need at least 2 points");
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      Fail(ErrorCode::kInvalidArgument,
           "FitLogLog: statistic is zero or negative at x = " + std::to_string(x[i]) +
               "; noiseless runs have no power law, check them against an absolute tolerance");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) Fail(ErrorCode::kInvalidArgument, "FitLogLog: need at least 2 distinct x values");
  SlopeFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  if (fit.points > 2) fit.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

SlopeFit FitLogLog(const std::vector<ExperimentRecord>& records, GroupBy group_by,
                   Statistic statistic) {
  const auto groups = SummarizeGroups(records, group_by, statistic);
  if (groups.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "FitLogLog: need at least 2 distinct group values");
  }
  std::vector<double> x, y;
  for (const auto& g : groups) {
    x.push_back(g.x);
    y.push_back(g.value);
  }
  return FitLogLog(x, y);
}

double AlignedAngle(const Vector& x, const Vector& z) {
  const double nx = x.norm();
  const double nz = z.norm();
  if (nx == 0.0 || nz == 0.0) return 0.0;
  return std::acos(std::clamp(std::abs(x.dot(z)) / (nx * nz), 0.0, 1.0));
}

SharpnessResult SharpnessExperiment(int d, const std::vector<int>& m_values, int trials,
                                    std::uint64_t master_seed, const NoiseSpec& noise) {
  if (!std::is_sorted(m_values.begin(), m_values.end())) {
    Fail(ErrorCode::kInvalidArgument, "SharpnessExperiment: m_values must be nondecreasing");
  }
  if (trials < 1) Fail(ErrorCode::kInvalidArgument, "SharpnessExperiment: trials must be >= 1");
  ExperimentPlan plan;
  plan.d_values = {d};
  plan.m_values = m_values;
  plan.noise = noise;
  plan.solver = SolverKind::kErrorReduction;
  plan.trials = trials;
  plan.master_seed = master_seed;
  plan.restarts = 5;
  ValidatePlan(plan);

  SharpnessResult out;
  out.min_dist = std::numeric_limits<double>::infinity();
  for (const auto& point : ExpandGrid(plan)) {
    for (int t = 0; t < trials; ++t) {
      TrialOutcome trial = RunTrialDetailed(plan, point, t);
      const double m = point.m;
      const double mean_eta = trial.eta.mean();
      const double theta = AlignedAngle(trial.result.x_hat, trial.x0.values);
      out.certificates.push_back(BetaEpsilon(trial.x0.norm, mean_eta, trial.eta.norm() / std::sqrt(m),
                                             theta, kSharpnessEpsilon,
                                             std::sqrt(2.0 / std::numbers::pi) * std::abs(mean_eta)));
      out.min_dist = std::min(out.min_dist, trial.record.dist);
      out.records.push_back(std::move(trial.record));
    }
  }
  return out;
}

double SpearmanCorrelation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    Fail(ErrorCode::kInvalidArgument, "SpearmanCorrelation: need two equal-length series (n >= 2)");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace phasels
