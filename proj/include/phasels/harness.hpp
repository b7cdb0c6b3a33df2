#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "phasels/geometry.hpp"
#include "phasels/signals.hpp"
#include "phasels/solvers.hpp"

namespace phasels {

enum class SolverKind {
  kErrorReduction,
  kAmplitudeGradient,
  kConstrainedLasso,
  kRegularizedLasso,
  kLinearLs,
  kLinearLassoConstrained,
  kLinearLassoRegularized,
};

const char* SolverName(SolverKind kind);
SolverKind ParseSolverKind(const std::string& name);
bool IsSparseSolver(SolverKind kind);
bool IsConstrainedSolver(SolverKind kind);
bool IsRegularizedSolver(SolverKind kind);
bool IsLinearModelSolver(SolverKind kind);

struct LambdaRule {
  enum class Kind { kPaper, kConjecture, kFixed };
  Kind kind = Kind::kPaper;
  double value = 1.0;  // c for kPaper / kConjecture, lambda itself for kFixed
};

struct RadiusRule {
  enum class Kind { kOracleL1Norm, kFixed };
  Kind kind = Kind::kOracleL1Norm;
  double value = 0.0;
};

struct ExperimentPlan {
  std::vector<int> d_values;
  std::vector<int> m_values;
  std::optional<std::vector<int>> s_values;
  NoiseSpec noise = noise::Zero{};
  SolverKind solver = SolverKind::kErrorReduction;
  std::optional<LambdaRule> lambda_rule;
  std::optional<RadiusRule> radius_rule;
  int trials = 1;
  std::uint64_t master_seed = 0;
  double x0_norm = 1.0;
  // Solver settings shared by every trial.
  int restarts = 5;
  int max_iters = 1000;
  double tol = 1e-10;
};

/// Throws kInvalidArgument naming the first violated plan invariant.
void ValidatePlan(const ExperimentPlan& plan);

/// s = 0 denotes a dense (full-support) signal.
struct GridPoint {
  int m = 0;
  int d = 0;
  int s = 0;
};

struct ExperimentRecord {
  int trial = 0;
  int m = 0;
  int d = 0;
  int s = 0;
  std::string noise_kind;
  double eta_norm = 0.0;
  double eta_l1 = 0.0;
  double mean_eta = 0.0;
  std::string solver;
  std::optional<double> lambda;
  std::optional<double> R;
  double dist = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ExperimentRecord&) const = default;
};

/// Everything a trial produced, for callers that need more than the record.
struct TrialOutcome {
  ExperimentRecord record;
  SolverResult result;
  Signal x0;
  Vector eta;
};

/// Trial seed: DeriveSeed(master, "trial", {m, d, s, trial_index}).
std::uint64_t TrialSeed(std::uint64_t master_seed, const GridPoint& point, int trial_index);

ExperimentRecord RunTrial(const ExperimentPlan& plan, const GridPoint& point, int trial_index);
TrialOutcome RunTrialDetailed(const ExperimentPlan& plan, const GridPoint& point,
                              int trial_index);

/// The grid in canonical (m, d, s) order with duplicates removed.
std::vector<GridPoint> ExpandGrid(const ExperimentPlan& plan);

struct TrialFailure {
  GridPoint point;
  int trial = 0;
  std::string message;
};

struct SweepResult {
  std::vector<ExperimentRecord> records;  // sorted by (m, d, s, trial)
  std::vector<TrialFailure> failures;
};

struct SweepOptions {
  int threads = 0;  // 0 = hardware concurrency
};

/// Runs every (grid point, trial). Fails only when more than 10% of trials
/// error; otherwise failed trials are listed in `failures` and omitted from
/// `records`.
SweepResult RunSweep(const ExperimentPlan& plan, const SweepOptions& options = {});

enum class GroupBy { kM, kD, kS };
enum class Statistic { kMedian, kMean };

GroupBy ParseGroupBy(const std::string& name);
const char* GroupByName(GroupBy g);
Statistic ParseStatistic(const std::string& name);
const char* StatisticName(Statistic s);

struct GroupSummary {
  double x = 0.0;
  double value = 0.0;      // the chosen statistic of dist
  double std_error = 0.0;  // sample sd of dist / sqrt(count)
  double min = 0.0;
  int count = 0;
};

std::vector<GroupSummary> SummarizeGroups(const std::vector<ExperimentRecord>& records,
                                          GroupBy group_by, Statistic statistic);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
  double slope_stderr = 0.0;  // OLS standard error; 0 when points == 2
};

/// Least squares of log(statistic(dist)) on log(group value).
SlopeFit FitLogLog(const std::vector<ExperimentRecord>& records, GroupBy group_by,
                   Statistic statistic);
SlopeFit FitLogLog(const std::vector<double>& x, const std::vector<double>& y);

struct SharpnessResult {
  std::vector<ExperimentRecord> records;
  double min_dist = 0.0;
  std::vector<LowerBoundCertificate> certificates;  // parallel to records
};

inline constexpr double kSharpnessEpsilon = 0.01;

/// Error reduction (spectral init, 5 restarts) under constant noise across
/// m_values, with a lower-bound certificate per record at the realised angle.
SharpnessResult SharpnessExperiment(int d, const std::vector<int>& m_values, int trials,
                                    std::uint64_t master_seed,
                                    const NoiseSpec& noise = noise::Constant{1.0});

/// Angle in [0, pi/2] between x and the sign-aligned z (0 when either is zero).
double AlignedAngle(const Vector& x, const Vector& z);

double Median(std::vector<double> values);
double SpearmanCorrelation(const std::vector<double>& x, const std::vector<double>& y);

// Record CSV: header of the ExperimentRecord field names, RFC-4180 quoting,
// doubles at 17 significant digits; absent lambda / R are empty fields.
void WriteRecords(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
void WriteRecords(const std::vector<ExperimentRecord>& records, std::ostream& out);
std::vector<ExperimentRecord> ReadRecords(const std::filesystem::path& path);
std::vector<ExperimentRecord> ParseRecords(const std::string& text);

/// Writes "x y yerr" rows per group under a "#" header and a sidecar
/// `<path>.slope` restating the fitted slope.
void EmitPlotData(const std::vector<ExperimentRecord>& records, GroupBy group_by,
                  Statistic statistic, const std::filesystem::path& path);

std::filesystem::path SlopeSidecarPath(const std::filesystem::path& path);

}  // namespace phasels
