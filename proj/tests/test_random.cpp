#include <cmath>
#include <numbers>

#include <doctest.h>

#include "phasels/random.hpp"

namespace {

// Straight transcription of the reference SplitMix64 / xoshiro256** code.
struct RefSplitMix {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct RefXoshiro {
  std::uint64_t s[4];
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

RefXoshiro Seeded(std::uint64_t seed) {
  RefSplitMix sm{seed};
  RefXoshiro x{};
  for (auto& w : x.s) w = sm.next();
  return x;
}

}  // namespace

TEST_SUITE("random") {
  TEST_CASE("reference generators reproduce their published vectors") {
    RefSplitMix sm{0};
    CHECK(sm.next() == 0xE220A8397B1DCDAFULL);
    RefXoshiro x{{1, 2, 3, 4}};
    CHECK(x.next() == 11520ULL);
    CHECK(x.next() == 0ULL);
    CHECK(x.next() == 1509978240ULL);
    CHECK(x.next() == 1215971899390074240ULL);
  }

  TEST_CASE("Rng matches xoshiro256** seeded by SplitMix64") {
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xDEADBEEFULL, ~0ULL}) {
      phasels::Rng rng(seed);
      RefXoshiro ref = Seeded(seed);
      for (int i = 0; i < 1000; ++i) REQUIRE(rng.NextU64() == ref.next());
    }
  }

  TEST_CASE("uniforms are top-53-bit fractions and normals are Box-Muller pairs") {
    phasels::Rng rng(7);
    RefXoshiro ref = Seeded(7);
    for (int i = 0; i < 100; ++i) {
      CHECK(rng.Uniform() == static_cast<double>(ref.next() >> 11) * 0x1.0p-53);
    }
    phasels::Rng g(9);
    RefXoshiro r = Seeded(9);
    for (int i = 0; i < 50; ++i) {
      const double u1 = 1.0 - static_cast<double>(r.next() >> 11) * 0x1.0p-53;
      const double u2 = static_cast<double>(r.next() >> 11) * 0x1.0p-53;
      const double rad = std::sqrt(-2.0 * std::log(u1));
      CHECK(g.Normal() == doctest::Approx(rad * std::cos(2 * std::numbers::pi * u2)).epsilon(1e-15));
      CHECK(g.Normal() == doctest::Approx(rad * std::sin(2 * std::numbers::pi * u2)).epsilon(1e-15));
    }
  }

  TEST_CASE("DeriveSeed chains Mix64 over the tag hash and indices") {
    using phasels::Mix64;
    using phasels::TagHash;
    CHECK(TagHash("") == 0xCBF29CE484222325ULL);
    CHECK(TagHash("a") == 0xAF63DC4C8601EC8CULL);
    const std::uint64_t h0 = Mix64(123 ^ TagHash("trial"));
    CHECK(phasels::DeriveSeed(123, "trial") == h0);
    CHECK(phasels::DeriveSeed(123, "trial", {4, 5}) == Mix64(Mix64(h0 ^ 4) ^ 5));
    CHECK(phasels::DeriveSeed(123, "trial", {4}) != phasels::DeriveSeed(123, "signal", {4}));
  }

  TEST_CASE("Below is in range and roughly uniform") {
    phasels::Rng rng(3);
    int counts[7] = {};
    for (int i = 0; i < 70000; ++i) {
      const auto v = rng.Below(7);
      REQUIRE(v < 7);
      ++counts[v];
    }
    // 10000 expected per bin, sd ~ 93
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  }

  TEST_CASE("normal moments") {
    phasels::Rng rng(11);
    const int n = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double z = rng.Normal();
      s1 += z;
      s2 += z * z;
    }
    CHECK(std::abs(s1 / n) < 3 * std::sqrt(1.0 / n));
    CHECK(std::abs(s2 / n - 1) < 3 * std::sqrt(2.0 / n));
  }
}
