#include "phasels/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "phasels/errors.hpp"
#include "phasels/geometry.hpp"
#include "phasels/random.hpp"

namespace phasels {

namespace {

constexpr double kRankTol = 1e-10;
constexpr int kPowerIters = 200;
constexpr double kPowerTol = 1e-10;
// Objectives at or below kExactFit * ||y||^2 are treated as an exact fit.
constexpr double kExactFit = 1e-28;
// Relative slack for accepting a step under auto step-size backtracking.
constexpr double kAscentSlack = 1e-12;

void RequireObservationLength(const MeasurementSet& a, const Vector& y) {
  if (y.size() != a.m()) {
    Fail(ErrorCode::kLengthMismatch, "measurement vector has length " + std::to_string(y.size()) +
                                         ", expected m = " + std::to_string(a.m()));
  }
}

void ValidateConfig(const SolverConfig& config, int d) {
  if (config.max_iters < 1) Fail(ErrorCode::kInvalidArgument, "max_iters must be >= 1");
  if (config.restarts < 1) Fail(ErrorCode::kInvalidArgument, "restarts must be >= 1");
  if (!(config.tol > 0.0)) Fail(ErrorCode::kInvalidArgument, "tol must be > 0");
  if (config.step && !(*config.step > 0.0)) Fail(ErrorCode::kInvalidArgument, "step must be > 0");
  if (config.init.kind == SolverInit::Kind::kGiven && config.init.given.size() != d) {
    Fail(ErrorCode::kLengthMismatch, "given initial point has length " +
                                         std::to_string(config.init.given.size()) +
                                         ", expected d = " + std::to_string(d));
  }
}

double NormEstimate(const Vector& y) {
  return std::max(0.0, std::sqrt(std::numbers::pi / 2.0) * y.mean());
}

// Restart 0 uses the configured initialisation; later restarts draw a random
// direction scaled to the norm estimate.
Vector InitialPoint(const MeasurementSet& a, const Vector& y, const SolverConfig& config,
                    int restart) {
  if (restart == 0) {
    switch (config.init.kind) {
      case SolverInit::Kind::kGiven: return config.init.given;
      case SolverInit::Kind::kSpectral:
        return SpectralInit(a, y, DeriveSeed(config.seed, "spectral"), config.spectral_support);
      case SolverInit::Kind::kRandom: break;
    }
  }
  Rng rng(DeriveSeed(config.seed, "restart", {static_cast<std::uint64_t>(restart)}));
  Vector x(a.d());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.Normal();
  return x * (NormEstimate(y) / x.norm());
}

double ExactFitFloor(const Vector& y) { return kExactFit * y.squaredNorm(); }

template <class Solve>
SolverResult BestOfRestarts(const SolverConfig& config, Solve&& solve_one) {
  SolverResult best;
  for (int r = 0; r < config.restarts; ++r) {
    SolverResult run = solve_one(r);
    run.restart_index = r;
    if (r == 0 || run.objective < best.objective) best = std::move(run);
  }
  return best;
}

enum class Penalty { kNone, kL1Ball, kL1 };

struct ProxProblem {
  Loss loss = Loss::kAmplitude;
  Penalty penalty = Penalty::kNone;
  double param = 0.0;  // radius for kL1Ball, lambda for kL1
};

double PenaltyValue(const ProxProblem& p, const Vector& x) {
  return p.penalty == Penalty::kL1 ? p.param * x.lpNorm<1>() : 0.0;
}

Vector ApplyProx(const ProxProblem& p, const Vector& z, double step, int m) {
  switch (p.penalty) {
    case Penalty::kNone: return z;
    case Penalty::kL1Ball: return ProjectL1Ball(z, p.param);
    // The engine steps on the 1/m-normalised objective, so the penalty is lambda/m.
    case Penalty::kL1: return SoftThreshold(z, step * p.param / m);
  }
  return z;
}

double LossFromProduct(const Vector& ax, const Vector& y, Loss loss) {
  return loss == Loss::kAmplitude ? (ax.cwiseAbs() - y).squaredNorm() : (ax - y).squaredNorm();
}

Vector GradientFromProduct(const Matrix& a, const Vector& ax, const Vector& y, Loss loss) {
  const Vector residual =
      loss == Loss::kAmplitude ? Vector(ax - y.cwiseProduct(SignVector(ax))) : Vector(ax - y);
  return (2.0 / static_cast<double>(a.rows())) * (a.transpose() * residual);
}

struct ProxRun {
  SolverResult result;
  double final_step = kAutoStep;
};

// Proximal (sub)gradient iteration on loss/m + penalty/m. With the auto step a
// trial point that raises the objective is rejected and the step halved.
void Record(const SolverConfig& config, IterationTrace& trace, double f, const Vector& x) {
  if (!config.record_trace) return;
  trace.objective.push_back(f);
  trace.l1_norm.push_back(x.lpNorm<1>());
}

ProxRun RunProxGradient(const Matrix& a, const Vector& y, Vector x, const ProxProblem& problem,
                        const SolverConfig& config) {
  const int m = static_cast<int>(a.rows());
  const bool backtrack = !config.step.has_value();
  double step = config.step.value_or(kAutoStep);
  const double floor = ExactFitFloor(y);

  if (problem.penalty == Penalty::kL1Ball) x = ProjectL1Ball(x, problem.param);
  Vector ax = a * x;
  double f = LossFromProduct(ax, y, problem.loss) + PenaltyValue(problem, x);

  ProxRun run;
  Record(config, run.result.trace, f, x);
  int k = 0;
  bool converged = false;
  while (k < config.max_iters) {
    ++k;
    const Vector grad = GradientFromProduct(a, ax, y, problem.loss);
    Vector candidate = ApplyProx(problem, x - step * grad, step, m);
    Vector a_candidate = a * candidate;
    const double f_candidate =
        LossFromProduct(a_candidate, y, problem.loss) + PenaltyValue(problem, candidate);

    if (!std::isfinite(f_candidate)) {
      if (!backtrack) {
        Fail(ErrorCode::kDivergence,
             "objective became non-finite at iteration " + std::to_string(k));
      }
      step *= 0.5;
      continue;
    }
    if (backtrack && f_candidate > f * (1.0 + kAscentSlack)) {
      step *= 0.5;
      continue;
    }
    const double previous = f;
    x = std::move(candidate);
    ax = std::move(a_candidate);
    f = f_candidate;
    Record(config, run.result.trace, f, x);
    if (f <= floor || std::abs(previous - f) <= config.tol * previous) {
      converged = true;
      break;
    }
  }
  run.result.x_hat = std::move(x);
  run.result.iterations = k;
  run.result.objective = f;
  run.result.converged = converged;
  run.final_step = step;
  return run;
}

// ||x - prox(x - step * grad)||: zero exactly at stationary points.
double ProxResidual(const Matrix& a, const Vector& y, const Vector& x, const ProxProblem& problem,
                    double step) {
  const Vector ax = a * x;
  const Vector grad = GradientFromProduct(a, ax, y, problem.loss);
  return (x - ApplyProx(problem, x - step * grad, step, static_cast<int>(a.rows()))).norm();
}

SolverResult SolveProx(const MeasurementSet& a, const Vector& y, const ProxProblem& problem,
                       const SolverConfig& config, bool error_reduction_residual) {
  RequireObservationLength(a, y);
  ValidateConfig(config, a.d());
  std::optional<LeastSquaresFactor> factor;
  if (error_reduction_residual && a.m() >= a.d()) {
    try {
      factor.emplace(a.entries);
    } catch (const Error&) {
      factor.reset();
    }
  }
  return BestOfRestarts(config, [&](int r) {
    ProxRun run = RunProxGradient(a.entries, y, InitialPoint(a, y, config, r), problem, config);
    run.result.fixed_point_residual =
        factor ? FixedPointResidual(*factor, a.entries, y, run.result.x_hat)
               : ProxResidual(a.entries, y, run.result.x_hat, problem, run.final_step);
    return run.result;
  });
}

}  // namespace

LeastSquaresFactor::LeastSquaresFactor(const Matrix& a) {
  if (a.rows() < a.cols()) {
    Fail(ErrorCode::kSingularSystem, "singular system: m = " + std::to_string(a.rows()) +
                                         " < d = " + std::to_string(a.cols()) +
                                         ", A^T A is not invertible");
  }
  qr_.compute(a);
  const auto diag = qr_.matrixQR().diagonal().cwiseAbs();
  const double largest = diag.maxCoeff();
  const double smallest = diag.minCoeff();
  if (!(largest > 0.0) || smallest < kRankTol * largest) {
    Fail(ErrorCode::kSingularSystem,
         "singular system: A is rank deficient (min |R_ii| / max |R_ii| = " +
             std::to_string(largest > 0.0 ? smallest / largest : 0.0) + ")");
  }
}

Vector LeastSquaresFactor::Solve(const Vector& b) const { return qr_.solve(b); }

double FixedPointResidual(const LeastSquaresFactor& factor, const Matrix& a, const Vector& y,
                          const Vector& x) {
  const Vector ax = a * x;
  return (x - factor.Solve(y.cwiseProduct(SignVector(ax)))).norm();
}

double FixedPointResidual(const MeasurementSet& a, const Vector& y, const Vector& x) {
  RequireObservationLength(a, y);
  if (x.size() != a.d()) Fail(ErrorCode::kLengthMismatch, "x has the wrong length");
  const LeastSquaresFactor factor(a.entries);
  return FixedPointResidual(factor, a.entries, y, x);
}

double LossValue(const Matrix& a, const Vector& y, const Vector& x, Loss loss) {
  return LossFromProduct(a * x, y, loss);
}

Vector LossGradient(const Matrix& a, const Vector& y, const Vector& x, Loss loss) {
  return GradientFromProduct(a, a * x, y, loss);
}

Vector SpectralInit(const MeasurementSet& a, const Vector& y, std::uint64_t seed,
                    int support_size) {
  RequireObservationLength(a, y);
  if (!y.allFinite()) Fail(ErrorCode::kInvalidArgument, "SpectralInit: y must be finite");
  const int d = a.d();
  const double scale = NormEstimate(y);
  if (scale == 0.0) return Vector::Zero(d);

  const Vector weights = y.cwiseAbs2();
  std::vector<int> support(d);
  std::iota(support.begin(), support.end(), 0);
  if (support_size > 0 && support_size < d) {
    const Vector marginal = a.entries.cwiseAbs2().transpose() * weights;
    std::stable_sort(support.begin(), support.end(),
                     [&](int i, int j) { return marginal(i) > marginal(j); });
    support.resize(support_size);
    std::sort(support.begin(), support.end());
  }
  const int k = static_cast<int>(support.size());
  Matrix sub(a.m(), k);
  for (int j = 0; j < k; ++j) sub.col(j) = a.entries.col(support[j]);

  Rng rng(seed);
  Vector v(k);
  for (int j = 0; j < k; ++j) v(j) = rng.Normal();
  v.normalize();
  const double inv_m = 1.0 / static_cast<double>(a.m());
  double eigenvalue = 0.0;
  for (int it = 0; it < kPowerIters; ++it) {
    Vector w = inv_m * (sub.transpose() * weights.cwiseProduct(sub * v));
    const double next = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
    const bool done = std::abs(next - eigenvalue) < kPowerTol * std::abs(next);
    eigenvalue = next;
    if (done) break;
  }
  Eigen::Index lead = 0;
  v.cwiseAbs().maxCoeff(&lead);
  if (v(lead) < 0.0) v = -v;

  Vector x = Vector::Zero(d);
  for (int j = 0; j < k; ++j) x(support[j]) = v(j);
  return scale * x;
}

SolverResult ErrorReduction(const MeasurementSet& a, const Vector& y, const SolverConfig& config) {
  RequireObservationLength(a, y);
  ValidateConfig(config, a.d());
  const LeastSquaresFactor factor(a.entries);
  const Matrix& mat = a.entries;
  const double floor = ExactFitFloor(y);

  return BestOfRestarts(config, [&](int r) {
    Vector x = InitialPoint(a, y, config, r);
    Vector ax = mat * x;
    double f = LossFromProduct(ax, y, Loss::kAmplitude);
    SolverResult result;
    Record(config, result.trace, f, x);
    int k = 0;
    while (k < config.max_iters) {
      ++k;
      x = factor.Solve(y.cwiseProduct(SignVector(ax)));
      ax = mat * x;
      const double previous = f;
      f = LossFromProduct(ax, y, Loss::kAmplitude);
      Record(config, result.trace, f, x);
      // Stalled, in either direction: with negative entries in y the
      // iteration is not a descent method for the amplitude loss.
      if (f <= floor || std::abs(previous - f) <= config.tol * previous) {
        result.converged = true;
        break;
      }
    }
    result.iterations = k;
    result.objective = f;
    result.fixed_point_residual = FixedPointResidual(factor, mat, y, x);
    result.x_hat = std::move(x);
    return result;
  });
}

SolverResult AmplitudeGradient(const MeasurementSet& a, const Vector& y,
                               const SolverConfig& config) {
  return SolveProx(a, y, {Loss::kAmplitude, Penalty::kNone, 0.0}, config, true);
}

SolverResult ConstrainedLassoSolve(const MeasurementSet& a, const Vector& y, double radius,
                                   Loss loss, const SolverConfig& config) {
  if (!(radius >= 0.0)) Fail(ErrorCode::kInvalidArgument, "constrained lasso: R must be >= 0");
  return SolveProx(a, y, {loss, Penalty::kL1Ball, radius}, config, false);
}

SolverResult RegularizedLassoSolve(const MeasurementSet& a, const Vector& y, double lambda,
                                   Loss loss, const SolverConfig& config) {
  if (!(lambda >= 0.0)) {
    Fail(ErrorCode::kInvalidArgument, "regularized lasso: lambda must be >= 0");
  }
  return SolveProx(a, y, {loss, Penalty::kL1, lambda}, config, false);
}

SolverResult LinearLeastSquares(const MeasurementSet& a, const Vector& y) {
  RequireObservationLength(a, y);
  const LeastSquaresFactor factor(a.entries);
  SolverResult result;
  result.x_hat = factor.Solve(y);
  result.objective = LossValue(a.entries, y, result.x_hat, Loss::kLinear);
  result.iterations = 1;
  result.converged = true;
  return result;
}

double ComputeLambda(const Vector& eta, int d, double c) {
  if (d < 2) Fail(ErrorCode::kInvalidArgument, "ComputeLambda: d must be >= 2 (log d degenerate)");
  if (!(c > 0.0)) Fail(ErrorCode::kInvalidArgument, "ComputeLambda: c must be > 0");
  return c * (eta.lpNorm<1>() + eta.norm() * std::sqrt(std::log(static_cast<double>(d))));
}

double ComputeLambdaConjecture(const Vector& eta, int d, double c) {
  if (d < 2) Fail(ErrorCode::kInvalidArgument, "ComputeLambda: d must be >= 2 (log d degenerate)");
  if (!(c > 0.0)) Fail(ErrorCode::kInvalidArgument, "ComputeLambda: c must be > 0");
  return c * eta.norm() * std::sqrt(std::log(static_cast<double>(d)));
}

}  // namespace phasels
