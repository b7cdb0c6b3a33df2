#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Dense>

namespace phasels {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ground-truth signal x0. `sparsity`, when set, bounds the support size.
struct Signal {
  Vector values;
  std::optional<int> sparsity;
  double norm = 0.0;

  int dim() const { return static_cast<int>(values.size()); }
};

/// Gaussian measurement ensemble A (rows are the measurement vectors a_i).
struct MeasurementSet {
  Matrix entries;
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(entries.rows()); }
  int d() const { return static_cast<int>(entries.cols()); }
};

namespace noise {
struct Zero {};
struct IidGaussian {
  double sigma = 0.0;
};
/// Gaussian direction rescaled to Euclidean norm `nu`.
struct FixedNorm {
  double nu = 0.0;
};
struct Constant {
  double c = 0.0;
};
struct Explicit {
  Vector values;
};
}  // namespace noise

using NoiseSpec = std::variant<noise::Zero, noise::IidGaussian, noise::FixedNorm,
                               noise::Constant, noise::Explicit>;

/// Short text label, e.g. "fixed_norm(1)"; used in experiment records.
std::string NoiseLabel(const NoiseSpec& spec);

/// Parses "zero", "iid_gaussian:0.1", "fixed_norm:1", "constant:1" (also
/// accepts the parenthesised label form). Explicit vectors are not parseable.
NoiseSpec ParseNoiseSpec(const std::string& text);

enum class ObservationModel { kPhaseless, kLinear };

/// Identifies the matrix an observation was taken with.
struct MeasurementRef {
  int m = 0;
  int d = 0;
  std::uint64_t seed = 0;
};

struct Observation {
  Vector y;
  Vector eta;
  ObservationModel model = ObservationModel::kPhaseless;
  Signal signal;
  MeasurementRef set_ref;
};

/// m x d matrix of i.i.d. N(0,1) draws, filled row by row from Rng(seed).
MeasurementSet GenGaussianMatrix(int m, int d, std::uint64_t seed);

/// Random signal with support of size s (uniform, Fisher-Yates prefix) or full
/// support, standard-normal entries rescaled to Euclidean norm `norm`.
Signal GenSignal(int d, std::optional<int> s, double norm, std::uint64_t seed);

/// Wraps explicit values as a Signal (norm computed, sparsity checked).
Signal MakeSignal(Vector values, std::optional<int> sparsity = std::nullopt);

Vector GenNoise(const NoiseSpec& spec, int m, std::uint64_t seed);

Observation Observe(const MeasurementSet& a, const Signal& x0, const Vector& eta,
                    ObservationModel model);

// Binary matrix file: 16-byte header ("PRBM", u32 m, u32 d, u32 reserved = 0)
// followed by m*d little-endian IEEE-754 doubles in row-major order.
void WriteMatrix(const MeasurementSet& a, const std::filesystem::path& path);
MeasurementSet ReadMatrix(const std::filesystem::path& path);

}  // namespace phasels
