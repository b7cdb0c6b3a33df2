// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Lines starting with "  " are details; "  note:" lines are diagnostics that
// never affect the verdict.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phasels/geometry.hpp"
#include "phasels/harness.hpp"
#include "phasels/random.hpp"
#include "phasels/solvers.hpp"

using namespace phasels;

namespace {

constexpr double kPi = std::numbers::pi;

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> details;

  void Require(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok   " : "MISS ") + what);
  }
  void Note(const std::string& what) { details.push_back("note: " + what); }
};

std::filesystem::path g_out_dir;

void Dump(const std::string& name, const std::vector<ExperimentRecord>& records) {
  if (g_out_dir.empty() || records.empty()) return;
  std::filesystem::create_directories(g_out_dir);
  WriteRecords(records, g_out_dir / (name + ".csv"));
  EmitPlotData(records, GroupBy::kM, Statistic::kMedian, g_out_dir / (name + ".dat"));
}

std::vector<int> Powers(int lo, int hi) {
  std::vector<int> out;
  for (int e = lo; e <= hi; ++e) out.push_back(1 << e);
  return out;
}

ExperimentPlan DensePlan(SolverKind solver, NoiseSpec noise, std::uint64_t seed) {
  ExperimentPlan p;
  p.d_values = {10};
  p.m_values = Powers(6, 12);
  p.noise = std::move(noise);
  p.solver = solver;
  p.trials = 50;
  p.master_seed = seed;
  p.restarts = 5;
  return p;
}

std::string Curve(const std::vector<ExperimentRecord>& records) {
  std::ostringstream s;
  for (const auto& g : SummarizeGroups(records, GroupBy::kM, Statistic::kMedian)) {
    s << ' ' << g.x << ':' << Fmt(g.value);
  }
  return s.str();
}

struct Shared {
  std::vector<ExperimentRecord> nonlinear;
  std::optional<SlopeFit> nonlinear_fit;
};
Shared g_shared;

constexpr std::uint64_t kSeedRate = 20240601;

const std::vector<ExperimentRecord>& NonlinearRecords() {
  if (g_shared.nonlinear.empty()) {
    g_shared.nonlinear =
        RunSweep(DensePlan(SolverKind::kErrorReduction, noise::FixedNorm{1.0}, kSeedRate)).records;
    g_shared.nonlinear_fit = FitLogLog(g_shared.nonlinear, GroupBy::kM, Statistic::kMedian);
  }
  return g_shared.nonlinear;
}

// ---------------------------------------------------------------------------

Verdict NonlinearRate() {
  Verdict v;
  const auto& records = NonlinearRecords();
  Dump("nonlinear_rate", records);
  const SlopeFit& fit = *g_shared.nonlinear_fit;
  v.Require(fit.slope >= -0.65 && fit.slope <= -0.35,
            "slope " + Fmt(fit.slope) + " (+/- " + Fmt(fit.slope_stderr) + ") in [-0.65, -0.35]");
  v.Require(fit.r_squared >= 0.9, "r2 " + Fmt(fit.r_squared) + " >= 0.9");
  v.details.push_back("median dist by m:" + Curve(records));

  // Same pipeline with unit-norm noise aligned with the all-ones direction
  // (eta = 1/sqrt(m) per entry), where the mean of eta does not shrink with m.
  std::vector<ExperimentRecord> aligned;
  for (int m : Powers(6, 12)) {
    ExperimentPlan p = DensePlan(SolverKind::kErrorReduction,
                                 noise::Constant{1.0 / std::sqrt(static_cast<double>(m))},
                                 kSeedRate + 1);
    p.m_values = {m};
    p.trials = 20;
    const auto r = RunSweep(p).records;
    aligned.insert(aligned.end(), r.begin(), r.end());
  }
  const SlopeFit af = FitLogLog(aligned, GroupBy::kM, Statistic::kMedian);
  v.Note("unit-norm constant noise (1/sqrt(m) per entry): slope " + Fmt(af.slope) + ", r2 " +
         Fmt(af.r_squared));
  return v;
}

Verdict LinearContrast() {
  Verdict v;
  const auto records =
      RunSweep(DensePlan(SolverKind::kLinearLs, noise::FixedNorm{1.0}, kSeedRate)).records;
  Dump("linear_contrast", records);
  const SlopeFit lin = FitLogLog(records, GroupBy::kM, Statistic::kMedian);
  NonlinearRecords();
  const SlopeFit& nl = *g_shared.nonlinear_fit;
  v.Require(lin.slope >= -1.15 && lin.slope <= -0.85,
            "linear slope " + Fmt(lin.slope) + " in [-1.15, -0.85]");
  const double lin_lo = lin.slope - 2 * lin.slope_stderr, lin_hi = lin.slope + 2 * lin.slope_stderr;
  const double nl_lo = nl.slope - 2 * nl.slope_stderr, nl_hi = nl.slope + 2 * nl.slope_stderr;
  v.Require(lin_hi < nl_lo || nl_hi < lin_lo,
            "2-stderr intervals disjoint: linear [" + Fmt(lin_lo) + ", " + Fmt(lin_hi) +
                "], nonlinear [" + Fmt(nl_lo) + ", " + Fmt(nl_hi) + "]");
  v.details.push_back("linear median dist by m:" + Curve(records));
  return v;
}

Verdict Sharpness() {
  Verdict v;
  const std::vector<int> ms = Powers(6, 12);
  const SharpnessResult noisy = SharpnessExperiment(10, ms, 50, 20240603, noise::Constant{1.0});
  Dump("sharpness", noisy.records);
  const SlopeFit fit = FitLogLog(noisy.records, GroupBy::kM, Statistic::kMedian);
  v.Require(fit.slope > -0.15, "slope " + Fmt(fit.slope) + " > -0.15");
  v.Require(noisy.min_dist >= 0.05, "min dist " + Fmt(noisy.min_dist) + " >= 0.05");
  v.details.push_back("median dist by m:" + Curve(noisy.records));

  const SharpnessResult control = SharpnessExperiment(10, ms, 50, 20240603, noise::Zero{});
  double worst_median = 0.0;
  for (const auto& g : SummarizeGroups(control.records, GroupBy::kM, Statistic::kMedian)) {
    worst_median = std::max(worst_median, g.value);
  }
  v.Require(worst_median <= 1e-6,
            "zero-noise control: largest per-m median dist " + Fmt(worst_median) + " <= 1e-6");

  int above = 0, informative = 0;
  for (std::size_t i = 0; i < noisy.records.size(); ++i) {
    const auto& c = noisy.certificates[i];
    if (c.beta <= 0.0) continue;
    ++informative;
    above += noisy.records[i].dist >= c.predicted_floor();
  }
  v.Note("records at or above their beta/9 certificate: " + std::to_string(above) + "/" +
         std::to_string(informative) + " with beta > 0");
  return v;
}

ExperimentPlan SparsePlan(SolverKind solver) {
  ExperimentPlan p;
  p.d_values = {400};
  p.s_values = std::vector<int>{5};
  p.m_values = Powers(5, 10);
  p.noise = noise::FixedNorm{1.0};
  p.solver = solver;
  p.trials = 30;
  p.master_seed = 20240604;
  p.restarts = 5;
  if (IsConstrainedSolver(solver)) p.radius_rule = RadiusRule{};
  if (IsRegularizedSolver(solver)) p.lambda_rule = LambdaRule{};
  return p;
}

std::vector<ExperimentRecord> g_constrained;

Verdict ConstrainedLasso() {
  Verdict v;
  g_constrained = RunSweep(SparsePlan(SolverKind::kConstrainedLasso)).records;
  Dump("constrained_lasso", g_constrained);
  const SlopeFit fit = FitLogLog(g_constrained, GroupBy::kM, Statistic::kMedian);
  v.Require(fit.slope >= -0.7 && fit.slope <= -0.3,
            "slope " + Fmt(fit.slope) + " in [-0.7, -0.3] (r2 " + Fmt(fit.r_squared) + ")");
  v.details.push_back("median dist by m:" + Curve(g_constrained));
  std::vector<ExperimentRecord> tail;
  for (const auto& r : g_constrained) {
    if (r.m >= 256) tail.push_back(r);
  }
  const SlopeFit tf = FitLogLog(tail, GroupBy::kM, Statistic::kMedian);
  v.Note("slope over m >= 256 only: " + Fmt(tf.slope));
  return v;
}

Verdict RegularizedLasso() {
  Verdict v;
  if (g_constrained.empty()) g_constrained = RunSweep(SparsePlan(SolverKind::kConstrainedLasso)).records;
  const auto records = RunSweep(SparsePlan(SolverKind::kRegularizedLasso)).records;
  Dump("regularized_lasso", records);
  const auto reg = SummarizeGroups(records, GroupBy::kM, Statistic::kMedian);
  const auto con = SummarizeGroups(g_constrained, GroupBy::kM, Statistic::kMedian);
  const double ratio = reg.back().value / con.back().value;
  v.Require(ratio <= 3.0, "median dist at m = " + Fmt(reg.back().x) + ": regularized " +
                              Fmt(reg.back().value) + " vs constrained " + Fmt(con.back().value) +
                              ", ratio " + Fmt(ratio) + " <= 3");
  v.details.push_back("regularized median dist by m:" + Curve(records));
  v.details.push_back("constrained median dist by m:" + Curve(g_constrained));
  double lambda_sum = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.m == reg.back().x && r.lambda) {
      lambda_sum += *r.lambda;
      ++n;
    }
  }
  v.Note("mean lambda at the largest m: " + Fmt(lambda_sum / std::max(n, 1)) +
         "; lambda sqrt(s) / (2m) = " +
         Fmt(lambda_sum / std::max(n, 1) * std::sqrt(5.0) / (2 * reg.back().x)));
  return v;
}

Verdict FixedPoints() {
  Verdict v;
  const ExperimentPlan p = DensePlan(SolverKind::kErrorReduction, noise::FixedNorm{1.0}, kSeedRate);
  int converged = 0, certified = 0, attempted = 0;
  double worst = 0.0;
  for (int t = 0; converged < 200 && t < p.trials; ++t) {
    for (int m : p.m_values) {
      if (converged == 200) break;
      ++attempted;
      const TrialOutcome o = RunTrialDetailed(p, {m, 10, 0}, t);
      if (!o.result.converged) continue;
      ++converged;
      const double ratio = o.result.fixed_point_residual / (1 + o.result.x_hat.norm());
      worst = std::max(worst, ratio);
      certified += ratio <= 1e-6;
    }
  }
  v.Require(converged == 200, std::to_string(converged) + " converged solves collected from " +
                                  std::to_string(attempted) + " attempts");
  v.Require(certified == converged, std::to_string(certified) + "/" + std::to_string(converged) +
                                        " with residual <= 1e-6 (1 + ||x||); worst ratio " +
                                        Fmt(worst));
  return v;
}

Verdict XiIdentity() {
  Verdict v;
  for (int k = 0; k <= 4; ++k) {
    const double theta = k * kPi / 8;
    const McEstimate e = ExpectedAbsXi(theta, 100000, DeriveSeed(20240607, "xi", {std::uint64_t(k)}));
    const double target = FTheta(theta) + std::abs(std::cos(theta));
    const double z = std::abs(e.estimate - target) / e.std_error;
    v.Require(z <= 4.0, "theta = " + std::to_string(k) + "pi/8: |estimate - target| = " +
                            Fmt(z) + " stderr <= 4");
  }
  v.Require(std::abs(FTheta(0.0)) <= 1e-12, "f(0) = 0 to 1e-12");
  v.Require(std::abs(FTheta(kPi / 2) - 2 / kPi) <= 1e-12, "f(pi/2) = 2/pi to 1e-12");
  return v;
}

Verdict Srip() {
  Verdict v;
  int positive = 0;
  bool invariant = true;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MeasurementSet a = GenGaussianMatrix(12, 4, DeriveSeed(20240608, "srip", {seed}));
    const SripEstimate e = SripConstants(a, 1, SripMode::kExhaustive, 0, 0);
    positive += e.theta_minus > 0.0;
    std::vector<int> perm(12);
    for (int i = 0; i < 12; ++i) perm[i] = i;
    Rng rng(DeriveSeed(20240608, "perm", {seed}));
    for (int i = 11; i > 0; --i) std::swap(perm[i], perm[rng.Below(i + 1)]);
    MeasurementSet permuted = a;
    for (int i = 0; i < 12; ++i) permuted.entries.row(i) = a.entries.row(perm[i]);
    const SripEstimate p = SripConstants(permuted, 1, SripMode::kExhaustive, 0, 0);
    const double gap = std::max(std::abs(p.theta_minus - e.theta_minus),
                                std::abs(p.theta_plus - e.theta_plus));
    worst_gap = std::max(worst_gap, gap);
    invariant = invariant && gap <= 1e-12;
  }
  v.Require(positive >= 19, "theta_minus > 0 in " + std::to_string(positive) + "/20 seeds");
  v.Require(invariant, "row permutation changes the constants by at most " + Fmt(worst_gap));
  return v;
}

Verdict Widths() {
  Verdict v;
  const WidthEstimate s1 = GaussianWidth(WidthSet::Sphere(1), 100000, 20240609);
  v.Require(std::abs(s1.mean - std::sqrt(2 / kPi)) <= 3 * s1.std_error,
            "sphere(1) " + Fmt(s1.mean) + " within 3 stderr of sqrt(2/pi)");
  double prev = 0.0;
  bool monotone = true;
  for (int d : {2, 8, 32, 128}) {
    const auto ud = static_cast<std::uint64_t>(d);
    const WidthEstimate w = GaussianWidth(WidthSet::L1Ball(d), 100000, DeriveSeed(20240609, "l1", {ud}));
    monotone = monotone && w.mean >= prev;
    prev = w.mean;
    Rng rng(DeriveSeed(20240609, "independent", {ud}));
    double s = 0, s2 = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      double mx = 0;
      for (int i = 0; i < d; ++i) mx = std::max(mx, std::abs(rng.Normal()));
      s += mx;
      s2 += mx * mx;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    v.Require(std::abs(mean - w.mean) <= 3 * std::hypot(se, w.std_error),
              "l1_ball(" + std::to_string(d) + ") " + Fmt(w.mean) +
                  " within 3 stderr of independent " + Fmt(mean));

    const auto sphere = GaussianWidthDraws(WidthSet::Sphere(d), 2000, ud);
    const auto kdd = GaussianWidthDraws(WidthSet::Kds(d, d), 2000, ud);
    double gap = 0.0;
    for (std::size_t k = 0; k < sphere.size(); ++k) gap = std::max(gap, std::abs(sphere[k] - kdd[k]));
    v.Require(gap <= 1e-9, "k_ds(" + std::to_string(d) + ", " + std::to_string(d) +
                               ") per-draw gap to sphere " + Fmt(gap));
  }
  v.Require(monotone, "l1_ball width nondecreasing over d = 2, 8, 32, 128");
  return v;
}

Verdict Properties() {
  Verdict v;
  Rng rng(20240610);
  auto normal = [&](int n, double scale = 1.0) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = scale * rng.Normal();
    return x;
  };

  // projection: feasibility, optimality against probes, KKT, nonexpansiveness
  bool proj_ok = true;
  for (int k = 0; k < 1000 && proj_ok; ++k) {
    const int d = 1 + static_cast<int>(rng.Below(12));
    const Vector x = normal(d, 2.0);
    const double r = 3.0 * rng.Uniform();
    const Vector w = ProjectL1Ball(x, r);
    proj_ok = w.lpNorm<1>() <= r + 1e-9;
    if (x.lpNorm<1>() > r) {
      proj_ok = proj_ok && std::abs(w.lpNorm<1>() - r) <= 1e-9;
      // KKT: on the support, x_i - w_i = tau sign(w_i) with one tau; off it |x_i| <= tau
      double tau = -1.0;
      for (int i = 0; i < d; ++i) {
        if (w(i) != 0.0) tau = std::abs(x(i) - w(i));
      }
      for (int i = 0; i < d && tau >= 0.0; ++i) {
        if (w(i) != 0.0) {
          proj_ok = proj_ok && std::abs(x(i) - w(i) - tau * (w(i) > 0 ? 1 : -1)) <= 1e-9;
        } else {
          proj_ok = proj_ok && std::abs(x(i)) <= tau + 1e-9;
        }
      }
    }
    for (int p = 0; p < 20; ++p) {
      Vector probe = normal(d);
      probe *= r * rng.Uniform() / std::max(probe.lpNorm<1>(), 1e-300);
      proj_ok = proj_ok && (w - x).norm() <= (probe - x).norm() + 1e-12;
    }
    const Vector x2 = x + normal(d, 0.5);
    proj_ok = proj_ok && (ProjectL1Ball(x2, r) - w).norm() <= (x2 - x).norm() + 1e-12;
  }
  v.Require(proj_ok, "l1 projection: feasibility, KKT, probe optimality, nonexpansive (1000 cases)");

  // prox: 1-D grid search per coordinate
  bool prox_ok = true;
  for (int k = 0; k < 200; ++k) {
    const double x = 4.0 * (rng.Uniform() - 0.5), tau = 1.5 * rng.Uniform();
    double best = 1e300, arg = 0;
    for (int i = -30000; i <= 30000; ++i) {
      const double w = i * 1e-4, obj = 0.5 * (w - x) * (w - x) + tau * std::abs(w);
      if (obj < best) {
        best = obj;
        arg = w;
      }
    }
    prox_ok = prox_ok && std::abs(SoftThreshold(Vector::Constant(1, x), tau)(0) - arg) <= 1e-4;
  }
  v.Require(prox_ok, "soft threshold equals the grid-searched prox (200 cases)");

  // gradient against central differences away from the kink set
  bool grad_ok = true;
  for (int checked = 0; checked < 100;) {
    const Matrix a = GenGaussianMatrix(20, 5, rng.NextU64()).entries;
    const Vector y = normal(20).cwiseAbs();
    const Vector x = normal(5);
    if ((a * x).cwiseAbs().minCoeff() <= 1e-3) continue;
    ++checked;
    const Vector g = LossGradient(a, y, x, Loss::kAmplitude);
    for (int j = 0; j < 5; ++j) {
      Vector xp = x, xm = x;
      xp(j) += 1e-6;
      xm(j) -= 1e-6;
      const double fd = (LossValue(a, y, xp, Loss::kAmplitude) - LossValue(a, y, xm, Loss::kAmplitude)) /
                        (2e-6 * 20);
      grad_ok = grad_ok && std::abs(fd - g(j)) <= 1e-4 * std::max(1.0, std::abs(g(j)));
    }
  }
  v.Require(grad_ok, "amplitude gradient matches central differences (100 points)");

  // objective monotonicity and constrained feasibility along iterates
  bool mono_ok = true;
  for (int k = 0; k < 30; ++k) {
    const MeasurementSet a = GenGaussianMatrix(60, 20, rng.NextU64());
    const Signal x0 = GenSignal(20, 4, 1.0, rng.NextU64());
    const Vector y = Observe(a, x0, GenNoise(noise::FixedNorm{1.0}, 60, rng.NextU64()),
                             ObservationModel::kPhaseless).y;
    SolverConfig c;
    c.restarts = 1;
    c.seed = rng.NextU64();
    c.init = SolverInit::Random();
    c.record_trace = true;
    auto nonincreasing = [](const std::vector<double>& f) {
      for (std::size_t i = 1; i < f.size(); ++i) {
        if (f[i] > f[i - 1] + 1e-10) return false;
      }
      return true;
    };
    // error reduction descends only when y >= 0
    const Vector y_pos = Observe(a, x0, GenNoise(noise::Constant{0.3}, 60, 0),
                                 ObservationModel::kPhaseless).y;
    mono_ok = mono_ok && nonincreasing(ErrorReduction(a, y_pos, c).trace.objective);
    mono_ok = mono_ok && nonincreasing(RegularizedLassoSolve(a, y, 2.0, Loss::kAmplitude, c).trace.objective);
    const double r = 0.5 + rng.Uniform();
    const SolverResult con = ConstrainedLassoSolve(a, y, r, Loss::kAmplitude, c);
    mono_ok = mono_ok && nonincreasing(con.trace.objective);
    for (double l1 : con.trace.l1_norm) mono_ok = mono_ok && l1 <= r + 1e-9;
  }
  v.Require(mono_ok, "objectives nonincreasing and constrained iterates feasible (30 instances)");

  // determinism and CSV round trip
  const ExperimentPlan p = DensePlan(SolverKind::kErrorReduction, noise::FixedNorm{1.0}, 99);
  ExperimentRecord r1 = RunTrial(p, {128, 10, 0}, 3), r2 = RunTrial(p, {128, 10, 0}, 3);
  r1.runtime_ms = r2.runtime_ms = 0.0;
  v.Require(r1 == r2, "a repeated trial gives an identical record");
  ExperimentPlan small = p;
  small.m_values = {64, 128};
  small.trials = 4;
  const auto a = RunSweep(small, {1}).records;
  auto b = RunSweep(small, {3}).records;
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i) {
    ExperimentRecord x = a[i], y = b[i];
    x.runtime_ms = y.runtime_ms = 0.0;
    same = x == y;
  }
  v.Require(same, "sweeps on 1 and 3 threads agree");
  std::ostringstream csv;
  WriteRecords(a, csv);
  v.Require(ParseRecords(csv.str()) == a, "records survive a CSV round trip");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasels acceptance run"};
  std::vector<int> only;
  std::string out_dir;
  app.add_option("--only", only, "Run only these criteria (1-10)")->delimiter(',');
  app.add_option("--out-dir", out_dir, "Write per-criterion records and plot data here");
  CLI11_PARSE(app, argc, argv);
  g_out_dir = out_dir;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"nonlinear least squares rate under fixed-norm noise", NonlinearRate},
      {"linear least squares contrast", LinearContrast},
      {"error floor under constant noise", Sharpness},
      {"constrained amplitude Lasso rate", ConstrainedLasso},
      {"regularized versus constrained amplitude Lasso", RegularizedLasso},
      {"fixed-point certification of error reduction", FixedPoints},
      {"f(theta) and E|xi| identity", XiIdentity},
      {"strong restricted isometry constants", Srip},
      {"Gaussian widths", Widths},
      {"property suites", Properties},
  };
  const std::set<int> selected(only.begin(), only.end());
  int passed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    ++run;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.Require(false, std::string("error: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    passed += v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first
              << " (" << Fmt(secs) << " s)\n";
    for (const auto& d : v.details) std::cout << "  " << d << '\n';
    std::cout.flush();
  }
  std::cout << passed << "/" << run << " criteria passed\n";
  return passed == run ? 0 : 1;
}
