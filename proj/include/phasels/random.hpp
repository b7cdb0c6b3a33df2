#pragma once

// Reproducible random streams.
//
// Generator: xoshiro256** 1.0 (Blackman & Vigna), state seeded by four
// successive SplitMix64 outputs of the 64-bit seed.
// Uniforms: top 53 bits of a draw scaled by 2^-53, giving [0, 1).
// Normals: basic Box-Muller on (u1, u2) with u1 = 1 - uniform() in (0, 1],
//   z0 = sqrt(-2 ln u1) cos(2 pi u2), z1 = sqrt(-2 ln u1) sin(2 pi u2);
//   z0 is returned first and z1 cached for the following call.
// This is sampler version "phasels-normal-v1". Any change to the above is a
// breaking change to every frozen seed in the test suite.

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace phasels {

inline constexpr std::string_view kSamplerVersion = "phasels-normal-v1";

// SplitMix64 finalizer (Stafford variant 13 constants).
constexpr std::uint64_t Mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// FNV-1a over the tag bytes; used to turn purpose strings into 64-bit tags.
constexpr std::uint64_t TagHash(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Sub-stream seed for (master, purpose, indices...):
//   h = Mix64(master ^ TagHash(purpose)); for each index i: h = Mix64(h ^ i).
std::uint64_t DeriveSeed(std::uint64_t master, std::string_view purpose,
                         std::initializer_list<std::uint64_t> indices = {});

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t NextU64();
  double Uniform();
  double Normal();
  // Uniform integer in [0, n) by rejection (unbiased). n must be > 0.
  std::uint64_t Below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace phasels
