#include "phasels/signals.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "phasels/errors.hpp"
#include "phasels/random.hpp"
#include "overloaded.hpp"

namespace phasels {

using detail::Overloaded;

namespace {

std::string FormatParam(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double ParseNumber(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    Fail(ErrorCode::kParse, "bad number '" + text + "' in " + context);
  }
  if (used != text.size()) Fail(ErrorCode::kParse, "bad number '" + text + "' in " + context);
  return value;
}

}  // namespace

std::string NoiseLabel(const NoiseSpec& spec) {
  return std::visit(
      Overloaded{
          [](const noise::Zero&) { return std::string("zero"); },
          [](const noise::IidGaussian& n) { return "iid_gaussian(" + FormatParam(n.sigma) + ")"; },
          [](const noise::FixedNorm& n) { return "fixed_norm(" + FormatParam(n.nu) + ")"; },
          [](const noise::Constant& n) { return "constant(" + FormatParam(n.c) + ")"; },
          [](const noise::Explicit&) { return std::string("explicit"); },
      },
      spec);
}

NoiseSpec ParseNoiseSpec(const std::string& text) {
  std::string kind = text;
  std::string param;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    kind = text.substr(0, colon);
    param = text.substr(colon + 1);
  } else if (auto open = text.find('('); open != std::string::npos && text.back() == ')') {
    kind = text.substr(0, open);
    param = text.substr(open + 1, text.size() - open - 2);
  }
  if (kind == "zero") {
    if (!param.empty()) Fail(ErrorCode::kParse, "noise kind 'zero' takes no parameter");
    return noise::Zero{};
  }
  if (param.empty()) Fail(ErrorCode::kParse, "noise kind '" + kind + "' needs a parameter");
  const double value = ParseNumber(param, "noise spec '" + text + "'");
  if (kind == "iid_gaussian") {
    if (value < 0) Fail(ErrorCode::kInvalidArgument, "iid_gaussian sigma must be >= 0");
    return noise::IidGaussian{value};
  }
  if (kind == "fixed_norm") {
    if (value < 0) Fail(ErrorCode::kInvalidArgument, "fixed_norm nu must be >= 0");
    return noise::FixedNorm{value};
  }
  if (kind == "constant") return noise::Constant{value};
  Fail(ErrorCode::kParse, "unknown noise kind '" + kind + "'");
}

MeasurementSet GenGaussianMatrix(int m, int d, std::uint64_t seed) {
  if (m < 1 || d < 1) {
    Fail(ErrorCode::kInvalidDimension, "invalid dimension: m = " + std::to_string(m) +
                                           ", d = " + std::to_string(d) + " (both must be >= 1)");
  }
  MeasurementSet set;
  set.seed = seed;
  set.entries.resize(m, d);
  Rng rng(seed);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) set.entries(i, j) = rng.Normal();
  }
  return set;
}

Signal GenSignal(int d, std::optional<int> s, double norm, std::uint64_t seed) {
  if (d < 1) Fail(ErrorCode::kInvalidDimension, "invalid dimension: d = " + std::to_string(d));
  if (s && (*s < 1 || *s > d)) {
    Fail(ErrorCode::kInvalidSparsity,
         "invalid sparsity s = " + std::to_string(*s) + " for d = " + std::to_string(d));
  }
  if (!(norm >= 0.0)) Fail(ErrorCode::kInvalidArgument, "signal norm must be >= 0");

  Signal signal;
  signal.sparsity = s;
  signal.values = Vector::Zero(d);
  if (norm == 0.0) return signal;

  Rng rng(seed);
  std::vector<int> support(d);
  std::iota(support.begin(), support.end(), 0);
  const int k = s.value_or(d);
  if (s) {
    for (int i = 0; i < k; ++i) {
      const auto j = i + static_cast<int>(rng.Below(static_cast<std::uint64_t>(d - i)));
      std::swap(support[i], support[j]);
    }
  }
  for (int i = 0; i < k; ++i) signal.values(support[i]) = rng.Normal();

  const double raw = signal.values.norm();
  // all-zero draw: fall back to a basis vector
  if (raw == 0.0) {
    signal.values(support[0]) = 1.0;
    signal.values *= norm;
  } else {
    signal.values *= norm / raw;
  }
  signal.norm = signal.values.norm();
  return signal;
}

Signal MakeSignal(Vector values, std::optional<int> sparsity) {
  Signal signal;
  signal.values = std::move(values);
  signal.sparsity = sparsity;
  if (sparsity) {
    const auto nnz = (signal.values.array() != 0.0).count();
    if (nnz > *sparsity) {
      Fail(ErrorCode::kInvalidSparsity, "signal has " + std::to_string(nnz) +
                                            " nonzeros, exceeding sparsity " +
                                            std::to_string(*sparsity));
    }
  }
  signal.norm = signal.values.norm();
  return signal;
}

Vector GenNoise(const NoiseSpec& spec, int m, std::uint64_t seed) {
  if (m < 1) Fail(ErrorCode::kInvalidDimension, "invalid dimension: m = " + std::to_string(m));
  auto gaussian = [&] {
    Rng rng(seed);
    Vector g(m);
    for (int i = 0; i < m; ++i) g(i) = rng.Normal();
    return g;
  };
  return std::visit(
      Overloaded{
          [&](const noise::Zero&) -> Vector { return Vector::Zero(m); },
          [&](const noise::IidGaussian& n) -> Vector { return n.sigma * gaussian(); },
          [&](const noise::FixedNorm& n) -> Vector {
            if (n.nu == 0.0) return Vector::Zero(m);
            Vector g = gaussian();
            return g * (n.nu / g.norm());
          },
          [&](const noise::Constant& n) -> Vector { return Vector::Constant(m, n.c); },
          [&](const noise::Explicit& n) -> Vector {
            if (n.values.size() != m) {
              Fail(ErrorCode::kLengthMismatch,
                   "explicit noise has length " + std::to_string(n.values.size()) +
                       ", expected m = " + std::to_string(m));
            }
            return n.values;
          },
      },
      spec);
}

Observation Observe(const MeasurementSet& a, const Signal& x0, const Vector& eta,
                    ObservationModel model) {
  if (x0.values.size() != a.d()) {
    Fail(ErrorCode::kLengthMismatch, "dimension mismatch in d: signal has length " +
                                         std::to_string(x0.values.size()) +
                                         ", matrix has d = " + std::to_string(a.d()));
  }
  if (eta.size() != a.m()) {
    Fail(ErrorCode::kLengthMismatch, "dimension mismatch in m: noise has length " +
                                         std::to_string(eta.size()) +
                                         ", matrix has m = " + std::to_string(a.m()));
  }
  Observation obs;
  const Vector ax = a.entries * x0.values;
  obs.y = (model == ObservationModel::kPhaseless ? Vector(ax.cwiseAbs()) : ax) + eta;
  obs.eta = eta;
  obs.model = model;
  obs.signal = x0;
  obs.set_ref = {a.m(), a.d(), a.seed};
  return obs;
}

namespace {

constexpr std::array<char, 4> kMatrixMagic = {'P', 'R', 'B', 'M'};

void PutU32(std::ostream& out, std::uint32_t v) {
  std::array<unsigned char, 4> bytes;
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes.data()), 4);
}

std::uint32_t GetU32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

}  // namespace

void WriteMatrix(const MeasurementSet& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(kMatrixMagic.data(), 4);
  PutU32(out, static_cast<std::uint32_t>(a.m()));
  PutU32(out, static_cast<std::uint32_t>(a.d()));
  PutU32(out, 0);
  for (int i = 0; i < a.m(); ++i) {
    for (int j = 0; j < a.d(); ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(a.entries(i, j));
      std::array<unsigned char, 8> bytes;
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
      out.write(reinterpret_cast<const char*>(bytes.data()), 8);
    }
  }
  if (!out) Fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

MeasurementSet ReadMatrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::array<unsigned char, 16> header;
  if (!in.read(reinterpret_cast<char*>(header.data()), 16)) {
    Fail(ErrorCode::kParse, "truncated matrix header in '" + path.string() + "'");
  }
  if (std::memcmp(header.data(), kMatrixMagic.data(), 4) != 0) {
    Fail(ErrorCode::kParse, "bad magic in '" + path.string() + "' (expected PRBM)");
  }
  const auto m = GetU32(header.data() + 4);
  const auto d = GetU32(header.data() + 8);
  if (m == 0 || d == 0) Fail(ErrorCode::kInvalidDimension, "matrix file has zero dimension");
  MeasurementSet set;
  set.entries.resize(m, d);
  std::array<unsigned char, 8> bytes;
  for (std::uint32_t i = 0; i < m; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      if (!in.read(reinterpret_cast<char*>(bytes.data()), 8)) {
        Fail(ErrorCode::kParse, "truncated matrix body in '" + path.string() + "'");
      }
      std::uint64_t bits = 0;
      for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[b]} << (8 * b);
      set.entries(i, j) = std::bit_cast<double>(bits);
    }
  }
  return set;
}

}  // namespace phasels
