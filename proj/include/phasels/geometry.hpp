#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "phasels/signals.hpp"

namespace phasels {

/// Entrywise sign with sign(0) = +1.
Vector SignVector(const Vector& v);

/// min(||x - z||, ||x + z||): distance modulo the global sign.
double DistSign(const Vector& x, const Vector& z);

/// Euclidean projection onto {w : ||w||_1 <= radius} (sort-and-threshold).
Vector ProjectL1Ball(const Vector& v, double radius);

/// Entrywise sign(v_i) * max(|v_i| - tau, 0).
Vector SoftThreshold(const Vector& v, double tau);

/// f(theta) = 2/pi (sin theta + (pi/2 - theta) cos theta) - |cos theta|, theta in [0, pi].
double FTheta(double theta);

/// Closed form of E|g1 (g1 cos theta + g2 sin theta)|: 2/pi (sin theta + (pi/2 - theta) cos theta).
double ExpectedAbsXiClosedForm(double theta);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// Monte Carlo estimate of E|g1 (g1 cos theta + g2 sin theta)|.
McEstimate ExpectedAbsXi(double theta, std::int64_t samples, std::uint64_t seed);

struct LowerBoundCertificate {
  double x0_norm = 0.0;
  double mean_eta = 0.0;
  double eta_rms = 0.0;
  double theta = 0.0;
  double epsilon = 0.0;
  double beta = 0.0;
  std::optional<double> delta0;

  /// The distance floor beta / 9 the certificate predicts.
  double predicted_floor() const { return beta / 9.0; }
};

/// beta = | x0_norm f(theta) + sqrt(2/pi) mean_eta | - (x0_norm + eta_rms) epsilon.
LowerBoundCertificate BetaEpsilon(double x0_norm, double mean_eta, double eta_rms, double theta,
                                  double epsilon, std::optional<double> delta0 = std::nullopt);

enum class SripMode { kExhaustive, kSampled };

struct SripEstimate {
  double theta_minus = 0.0;
  double theta_plus = 0.0;
  int s = 0;
  SripMode mode = SripMode::kExhaustive;
  std::int64_t subsets_evaluated = 0;
  std::int64_t directions_evaluated = 0;
};

inline constexpr int kSripMaxRows = 16;
inline constexpr std::int64_t kSripMaxSupports = 64;

/// Restricted-isometry constants of A / sqrt(m) over row subsets |I| >= m/2
/// and s-sparse directions.
///
/// Exhaustive mode enumerates every qualifying row subset and every size-s
/// support, taking the extreme eigenvalues of A_{I,S}^T A_{I,S} / m; it is an
/// exact computation and requires m <= 16 and C(d, s) <= 64. Sampled mode
/// draws `budget` random (subset, unit s-sparse direction) pairs; its
/// theta_minus is an upper bound and its theta_plus a lower bound on the true
/// constants.
SripEstimate SripConstants(const MeasurementSet& a, int s, SripMode mode, std::int64_t budget,
                           std::uint64_t seed);

struct WidthSet {
  enum class Kind { kSphere, kL1Ball, kKds };
  Kind kind = Kind::kSphere;
  int d = 1;
  int s = 1;  // only for kKds

  static WidthSet Sphere(int d) { return {Kind::kSphere, d, d}; }
  static WidthSet L1Ball(int d) { return {Kind::kL1Ball, d, 1}; }
  static WidthSet Kds(int d, int s) { return {Kind::kKds, d, s}; }
};

struct WidthEstimate {
  WidthSet set;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

struct KdsMaximizer {
  Vector x;
  double value = 0.0;
  double tau = 0.0;
};

inline constexpr double kKdsBisectionTol = 1e-10;

/// argmax <g, x> over K_{d,s} = {||x||_2 <= 1, ||x||_1 <= sqrt(s)}.
KdsMaximizer MaximizeOverKds(const Vector& g, int s);

/// sup_{x in T} <g, x> for one Gaussian draw g.
double SupportFunction(const WidthSet& set, const Vector& g);

/// Per-draw support-function values; draw k uses the k-th block of d normals
/// from Rng(seed), so sets of equal d share their g's for a shared seed.
std::vector<double> GaussianWidthDraws(const WidthSet& set, std::int64_t samples,
                                       std::uint64_t seed);

WidthEstimate GaussianWidth(const WidthSet& set, std::int64_t samples, std::uint64_t seed);

struct ConcentrationPoint {
  double t = 0.0;
  double empirical_tail = 0.0;
  double envelope = 0.0;
};

/// Empirical tail P(|f - mean f| >= t) for f(g) = max_i |g_i|, g ~ N(0, I_d),
/// against the envelope 2 exp(-t^2 / 4) for a 1-Lipschitz f.
std::vector<ConcentrationPoint> ConcentrationCheck(int d, std::int64_t draws,
                                                   const std::vector<double>& t_grid,
                                                   std::uint64_t seed);

}  // namespace phasels
