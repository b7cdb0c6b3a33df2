#include "phasels/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>

#include "phasels/errors.hpp"
#include "phasels/random.hpp"

namespace phasels {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrtTwoOverPi = std::sqrt(2.0 / kPi);

void RequireSameLength(const Vector& x, const Vector& z, const char* what) {
  if (x.size() != z.size()) {
    Fail(ErrorCode::kLengthMismatch, std::string(what) + ": length mismatch (" +
                                         std::to_string(x.size()) + " vs " +
                                         std::to_string(z.size()) + ")");
  }
}

// Welford accumulator; std_error uses the n - 1 sample deviation.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double StdError() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
  }
};

std::int64_t Binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > (std::int64_t{1} << 40)) return result;
  }
  return result;
}

// Calls fn(indices) for every size-k subset of {0..n-1} in lexicographic order.
void ForEachCombination(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::pair<double, double> ExtremeEigenvalues(const Matrix& gram) {
  if (gram.rows() == 1) return {gram(0, 0), gram(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

}  // namespace

Vector SignVector(const Vector& v) {
  return v.unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
}

double DistSign(const Vector& x, const Vector& z) {
  RequireSameLength(x, z, "DistSign");
  return std::min((x - z).norm(), (x + z).norm());
}

Vector ProjectL1Ball(const Vector& v, double radius) {
  if (!(radius >= 0.0)) Fail(ErrorCode::kInvalidArgument, "ProjectL1Ball: radius must be >= 0");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Vector::Zero(v.size());

  std::vector<double> u(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) u[i] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());

  // tau = (sum of the rho largest magnitudes - radius) / rho, rho the last
  // index where the running threshold stays below the sorted magnitude.
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (u[j] > candidate) tau = candidate;
  }
  return SoftThreshold(v, tau);
}

Vector SoftThreshold(const Vector& v, double tau) {
  if (!(tau >= 0.0)) Fail(ErrorCode::kInvalidArgument, "SoftThreshold: tau must be >= 0");
  return v.unaryExpr([tau](double x) {
    if (std::abs(x) <= tau) return 0.0;
    return x > 0.0 ? x - tau : x + tau;
  });
}

double FTheta(double theta) {
  if (!(theta >= 0.0 && theta <= kPi)) {
    Fail(ErrorCode::kInvalidArgument, "FTheta: theta must lie in [0, pi]");
  }
  // Same value as 2/pi (sin + (pi/2 - theta) cos) - |cos|, arranged so f(0) is exactly 0.
  const double c = std::cos(theta);
  return (2.0 / kPi) * (std::sin(theta) - theta * c) + (c - std::abs(c));
}

double ExpectedAbsXiClosedForm(double theta) {
  return (2.0 / kPi) * (std::sin(theta) + (kPi / 2.0 - theta) * std::cos(theta));
}

McEstimate ExpectedAbsXi(double theta, std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) Fail(ErrorCode::kInvalidArgument, "ExpectedAbsXi: samples must be >= 1");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Rng rng(seed);
  Moments acc;
  for (std::int64_t k = 0; k < samples; ++k) {
    const double g1 = rng.Normal();
    const double g2 = rng.Normal();
    acc.Add(std::abs(g1 * (g1 * c + g2 * s)));
  }
  return {acc.mean, acc.StdError(), samples};
}

LowerBoundCertificate BetaEpsilon(double x0_norm, double mean_eta, double eta_rms, double theta,
                                  double epsilon, std::optional<double> delta0) {
  if (!(x0_norm >= 0.0)) Fail(ErrorCode::kInvalidArgument, "BetaEpsilon: x0_norm must be >= 0");
  if (!(eta_rms >= 0.0)) Fail(ErrorCode::kInvalidArgument, "BetaEpsilon: eta_rms must be >= 0");
  if (!(epsilon > 0.0)) Fail(ErrorCode::kInvalidArgument, "BetaEpsilon: epsilon must be > 0");
  if (delta0) {
    const double cap = kSqrtTwoOverPi * std::abs(mean_eta);
    if (!(*delta0 >= 0.0) || *delta0 > cap * (1.0 + 1e-12)) {
      Fail(ErrorCode::kInvalidArgument,
           "BetaEpsilon: delta0 must satisfy 0 <= delta0 <= sqrt(2/pi)|mean_eta|");
    }
  }
  LowerBoundCertificate cert;
  cert.x0_norm = x0_norm;
  cert.mean_eta = mean_eta;
  cert.eta_rms = eta_rms;
  cert.theta = theta;
  cert.epsilon = epsilon;
  cert.delta0 = delta0;
  cert.beta = std::abs(x0_norm * FTheta(theta) + kSqrtTwoOverPi * mean_eta) -
              (x0_norm + eta_rms) * epsilon;
  return cert;
}

SripEstimate SripConstants(const MeasurementSet& a, int s, SripMode mode, std::int64_t budget,
                           std::uint64_t seed) {
  const int m = a.m();
  const int d = a.d();
  if (s < 1 || s > d) {
    Fail(ErrorCode::kInvalidSparsity,
         "SripConstants: s = " + std::to_string(s) + " must lie in [1, d = " +
             std::to_string(d) + "]");
  }
  const int min_rows = (m + 1) / 2;
  const double inv_m = 1.0 / static_cast<double>(m);

  SripEstimate est;
  est.s = s;
  est.mode = mode;
  est.theta_minus = std::numeric_limits<double>::infinity();
  est.theta_plus = -std::numeric_limits<double>::infinity();

  if (mode == SripMode::kExhaustive) {
    const std::int64_t supports = Binomial(d, s);
    if (m > kSripMaxRows || supports > kSripMaxSupports) {
      Fail(ErrorCode::kInvalidArgument,
           "SripConstants: exhaustive mode needs m <= 16 and C(d, s) <= 64 (got m = " +
               std::to_string(m) + ", C(d, s) = " + std::to_string(supports) +
               "); use sampled mode");
    }
    std::vector<std::vector<int>> support_list;
    ForEachCombination(d, s, [&](const std::vector<int>& idx) { support_list.push_back(idx); });

    Matrix gram(s, s);
    const std::uint32_t full = (std::uint32_t{1} << m);
    for (std::uint32_t mask = 1; mask < full; ++mask) {
      if (std::popcount(mask) < min_rows) continue;
      ++est.subsets_evaluated;
      for (const auto& support : support_list) {
        gram.setZero();
        for (int i = 0; i < m; ++i) {
          if (!(mask >> i & 1U)) continue;
          for (int p = 0; p < s; ++p) {
            const double ap = a.entries(i, support[p]);
            for (int q = 0; q <= p; ++q) gram(p, q) += ap * a.entries(i, support[q]);
          }
        }
        for (int p = 0; p < s; ++p) {
          for (int q = 0; q < p; ++q) gram(q, p) = gram(p, q);
        }
        const auto [lo, hi] = ExtremeEigenvalues(gram * inv_m);
        est.theta_minus = std::min(est.theta_minus, lo);
        est.theta_plus = std::max(est.theta_plus, hi);
      }
    }
    est.directions_evaluated = static_cast<std::int64_t>(support_list.size());
    est.theta_minus = std::max(est.theta_minus, 0.0);
    return est;
  }

  if (budget < 1) Fail(ErrorCode::kInvalidArgument, "SripConstants: sampled mode needs budget >= 1");
  Rng rng(seed);
  std::vector<int> rows(m);
  std::vector<int> cols(d);
  Vector x(s);
  for (std::int64_t k = 0; k < budget; ++k) {
    const int size = min_rows + static_cast<int>(rng.Below(static_cast<std::uint64_t>(m - min_rows + 1)));
    std::iota(rows.begin(), rows.end(), 0);
    for (int i = 0; i < size; ++i) {
      std::swap(rows[i], rows[i + static_cast<int>(rng.Below(static_cast<std::uint64_t>(m - i)))]);
    }
    std::iota(cols.begin(), cols.end(), 0);
    for (int j = 0; j < s; ++j) {
      std::swap(cols[j], cols[j + static_cast<int>(rng.Below(static_cast<std::uint64_t>(d - j)))]);
    }
    for (int j = 0; j < s; ++j) x(j) = rng.Normal();
    x.normalize();
    double energy = 0.0;
    for (int i = 0; i < size; ++i) {
      double dot = 0.0;
      for (int j = 0; j < s; ++j) dot += a.entries(rows[i], cols[j]) * x(j);
      energy += dot * dot;
    }
    energy *= inv_m;
    est.theta_minus = std::min(est.theta_minus, energy);
    est.theta_plus = std::max(est.theta_plus, energy);
  }
  est.subsets_evaluated = budget;
  est.directions_evaluated = budget;
  return est;
}

KdsMaximizer MaximizeOverKds(const Vector& g, int s) {
  const int d = static_cast<int>(g.size());
  if (s < 1 || s > d) {
    Fail(ErrorCode::kInvalidSparsity, "k_ds requires 1 <= s <= d (s = " + std::to_string(s) +
                                          ", d = " + std::to_string(d) + ")");
  }
  KdsMaximizer out;
  const double l2 = g.norm();
  if (l2 == 0.0) {
    out.x = Vector::Zero(d);
    return out;
  }
  const double budget = std::sqrt(static_cast<double>(s));
  if (g.lpNorm<1>() <= budget * l2) {
    out.x = g / l2;
    out.value = l2;
    return out;
  }

  // ||soft(g, tau)||_1 / ||soft(g, tau)||_2 is nonincreasing in tau; bisect on
  // [0, max|g_i|] for the smallest feasible threshold.
  auto feasible = [&](double tau, Vector& x) {
    x = SoftThreshold(g, tau);
    const double n2 = x.norm();
    if (n2 == 0.0) return false;
    x /= n2;
    return x.lpNorm<1>() <= budget;
  };
  double lo = 0.0;
  double hi = g.cwiseAbs().maxCoeff();
  Vector trial;
  Vector best;
  while (hi - lo > kKdsBisectionTol) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid, trial)) {
      hi = mid;
      best = trial;
    } else {
      lo = mid;
    }
  }
  if (best.size() == 0) {
    // Only the limit tau -> max|g_i| is feasible: spread over the tied maxima.
    const double top = g.cwiseAbs().maxCoeff();
    best = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      if (std::abs(g(i)) == top) best(i) = g(i) > 0 ? 1.0 : -1.0;
    }
    best.normalize();
  }
  out.x = std::move(best);
  out.value = g.dot(out.x);
  out.tau = hi;
  return out;
}

double SupportFunction(const WidthSet& set, const Vector& g) {
  switch (set.kind) {
    case WidthSet::Kind::kSphere: return g.norm();
    case WidthSet::Kind::kL1Ball: return g.cwiseAbs().maxCoeff();
    case WidthSet::Kind::kKds: return MaximizeOverKds(g, set.s).value;
  }
  return 0.0;
}

std::vector<double> GaussianWidthDraws(const WidthSet& set, std::int64_t samples,
                                       std::uint64_t seed) {
  if (set.d < 1) Fail(ErrorCode::kInvalidDimension, "GaussianWidth: d must be >= 1");
  if (set.kind == WidthSet::Kind::kKds && (set.s < 1 || set.s > set.d)) {
    Fail(ErrorCode::kInvalidSparsity, "GaussianWidth: k_ds requires 1 <= s <= d");
  }
  if (samples < 1) Fail(ErrorCode::kInvalidArgument, "GaussianWidth: samples must be >= 1");
  Rng rng(seed);
  Vector g(set.d);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t k = 0; k < samples; ++k) {
    for (int i = 0; i < set.d; ++i) g(i) = rng.Normal();
    values.push_back(SupportFunction(set, g));
  }
  return values;
}

WidthEstimate GaussianWidth(const WidthSet& set, std::int64_t samples, std::uint64_t seed) {
  if (samples < 2) Fail(ErrorCode::kInvalidArgument, "GaussianWidth: samples must be >= 2");
  Moments acc;
  for (double v : GaussianWidthDraws(set, samples, seed)) acc.Add(v);
  return {set, acc.mean, acc.StdError(), samples};
}

std::vector<ConcentrationPoint> ConcentrationCheck(int d, std::int64_t draws,
                                                   const std::vector<double>& t_grid,
                                                   std::uint64_t seed) {
  const auto values = GaussianWidthDraws(WidthSet::L1Ball(d), draws, seed);
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  std::vector<ConcentrationPoint> out;
  for (double t : t_grid) {
    const auto hits = std::count_if(values.begin(), values.end(),
                                    [&](double v) { return std::abs(v - mean) >= t; });
    out.push_back({t, static_cast<double>(hits) / static_cast<double>(values.size()),
                   2.0 * std::exp(-t * t / 4.0)});
  }
  return out;
}

}  // namespace phasels
