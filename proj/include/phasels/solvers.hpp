#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/QR>

#include "phasels/signals.hpp"

namespace phasels {

struct SolverInit {
  enum class Kind { kSpectral, kRandom, kGiven };
  Kind kind = Kind::kSpectral;
  Vector given;

  static SolverInit Spectral() { return {Kind::kSpectral, {}}; }
  static SolverInit Random() { return {Kind::kRandom, {}}; }
  static SolverInit Given(Vector x) { return {Kind::kGiven, std::move(x)}; }
};

inline constexpr double kAutoStep = 0.4;

struct SolverConfig {
  int max_iters = 1000;
  double tol = 1e-10;          // relative objective decrease
  std::optional<double> step;  // nullopt selects the auto step with backtracking
  int restarts = 1;
  SolverInit init = SolverInit::Spectral();
  std::uint64_t seed = 0;
  // When > 0, spectral initialisation is restricted to the this-many
  // coordinates with the largest y^2-weighted marginal energy.
  int spectral_support = 0;
  // Keep the objective and l1 norm of every accepted iterate in the result.
  bool record_trace = false;
};

/// Per-iterate history; entry 0 is the (projected) initial point.
struct IterationTrace {
  std::vector<double> objective;
  std::vector<double> l1_norm;
};

struct SolverResult {
  Vector x_hat;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  double fixed_point_residual = 0.0;
  int restart_index = 0;
  IterationTrace trace;  // filled only when SolverConfig::record_trace is set
};

enum class Loss { kAmplitude, kLinear };

/// Column-pivoted Householder QR of A, computed once and reused for every
/// least-squares solve. Throws kSingularSystem when the smallest |R_ii| is
/// below 1e-10 times the largest, or when m < d.
class LeastSquaresFactor {
 public:
  explicit LeastSquaresFactor(const Matrix& a);

  /// argmin_x ||A x - b||.
  Vector Solve(const Vector& b) const;

 private:
  Eigen::ColPivHouseholderQR<Matrix> qr_;
};

/// ||x - (A^T A)^{-1} A^T (y .* sign(A x))||.
double FixedPointResidual(const MeasurementSet& a, const Vector& y, const Vector& x);
double FixedPointResidual(const LeastSquaresFactor& factor, const Matrix& a, const Vector& y,
                          const Vector& x);

/// ||(|A x| - y)||^2 or ||A x - y||^2.
double LossValue(const Matrix& a, const Vector& y, const Vector& x, Loss loss);

/// (2/m) A^T (A x - y .* sign(A x)) for the amplitude loss, (2/m) A^T (A x - y)
/// for the linear loss: gradient of LossValue / m (a subgradient on the kink set).
Vector LossGradient(const Matrix& a, const Vector& y, const Vector& x, Loss loss);

/// Leading eigenvector of (1/m) sum_i y_i^2 a_i a_i^T by power iteration,
/// scaled to sqrt(pi/2) * mean(y). With support_size > 0 the eigenproblem is
/// restricted to the top coordinates of (1/m) sum_i y_i^2 a_ij^2.
Vector SpectralInit(const MeasurementSet& a, const Vector& y, std::uint64_t seed,
                    int support_size = 0);

SolverResult ErrorReduction(const MeasurementSet& a, const Vector& y, const SolverConfig& config);

SolverResult AmplitudeGradient(const MeasurementSet& a, const Vector& y,
                               const SolverConfig& config);

SolverResult ConstrainedLassoSolve(const MeasurementSet& a, const Vector& y, double radius,
                                   Loss loss, const SolverConfig& config);

SolverResult RegularizedLassoSolve(const MeasurementSet& a, const Vector& y, double lambda,
                                   Loss loss, const SolverConfig& config);

SolverResult LinearLeastSquares(const MeasurementSet& a, const Vector& y);

/// c * (||eta||_1 + ||eta||_2 sqrt(log d)).
double ComputeLambda(const Vector& eta, int d, double c = 1.0);

/// c * ||eta||_2 sqrt(log d), the sharper rule conjectured to suffice.
double ComputeLambdaConjecture(const Vector& eta, int d, double c = 1.0);

}  // namespace phasels
