#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "depscope/rng.hpp"

using namespace depscope;

TEST_CASE("mix64 is deterministic and separates nearby inputs", "[rng]") {
  REQUIRE(mix64(1, 2) == mix64(1, 2));
  REQUIRE(mix64(1, 2) != mix64(2, 1));
  REQUIRE(mix64(0) != mix64(1));
  REQUIRE(mix64(7, 0) != mix64(7, 1));
}

TEST_CASE("uniform01 stays in [0,1) with mean near one half", "[rng]") {
  std::mt19937_64 rng(42);
  const int n = 100000;
  double sum = 0.0, lo = 1.0, hi = -1.0;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  REQUIRE(lo >= 0.0);
  REQUIRE(hi < 1.0);
  REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform_in respects its bounds", "[rng]") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = uniform_in(rng, -3.0, 11.5);
    REQUIRE(x >= -3.0);
    REQUIRE(x < 11.5);
  }
}

TEST_CASE("gaussian_pair produces standard moments", "[rng]") {
  std::mt19937_64 rng(99);
  const int n = 100000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const GaussianPair g = gaussian_pair(rng);
    sum += g.a + g.b;
    sq += g.a * g.a + g.b * g.b;
  }
  const double mean = sum / (2 * n);
  const double var = sq / (2 * n) - mean * mean;
  REQUIRE(std::abs(mean) < 0.02);
  REQUIRE(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("gaussian quantile table is monotone, symmetric, centered", "[rng]") {
  const GaussianTable& t = GaussianTable::instance();
  double sum = 0.0;
  for (int i = 0; i < 65536; ++i) {
    sum += t.sample(static_cast<std::uint16_t>(i));
    if (i > 0)
      REQUIRE(t.sample(static_cast<std::uint16_t>(i)) >=
              t.sample(static_cast<std::uint16_t>(i - 1)));
    const float mirrored = t.sample(static_cast<std::uint16_t>(65535 - i));
    REQUIRE(std::abs(t.sample(static_cast<std::uint16_t>(i)) + mirrored) < 1e-5f);
  }
  REQUIRE(std::abs(sum / 65536.0) < 1e-6);
  // Spot values against the normal quantile function.
  REQUIRE(std::abs(t.sample(32768)) < 1e-4);          // median
  REQUIRE(std::abs(t.sample(55138) - 1.0) < 2e-3);    // ~84.13th percentile
}
