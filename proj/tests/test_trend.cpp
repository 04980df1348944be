#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "depscope/rng.hpp"
#include "depscope/trend.hpp"

using namespace depscope;

namespace {

WatchWindow window_of(const std::vector<double>& values, int k = 30) {
  WatchWindow w(k);
  for (std::size_t i = 0; i < values.size(); ++i)
    w.push({values[i], static_cast<std::int64_t>(i), false});
  return w;
}

}  // namespace

TEST_CASE("feature is the mean absolute offset from the reference", "[trend]") {
  ParticleSet ps;
  ps.frame_index = 3;
  ps.particles = {{170.0, 5.0, 6.0, 10}};
  const auto at_ref = extract_feature(ps, 170.0);
  REQUIRE(at_ref);
  REQUIRE(at_ref->value == 0.0);
  REQUIRE(at_ref->frame_index == 3);
  REQUIRE_FALSE(at_ref->is_imputed);

  ps.particles = {{160.0, 5.0, 6.0, 10}, {200.0, 5.0, 6.0, 9}};
  const auto two = extract_feature(ps, 170.0);
  REQUIRE(two);
  REQUIRE(two->value == 20.0);  // (10 + 30) / 2

  ps.particles.clear();
  REQUIRE_FALSE(extract_feature(ps, 170.0).has_value());
  REQUIRE_THROWS_AS(extract_feature(ps, -1.0), std::invalid_argument);
}

TEST_CASE("watch window evicts strictly oldest-first", "[trend]") {
  WatchWindow w(3);
  for (int i = 0; i < 5; ++i) w.push({static_cast<double>(i), i, false});
  REQUIRE(w.size() == 3);
  REQUIRE(w.values() == std::vector<double>{2.0, 3.0, 4.0});
  REQUIRE(w.samples().front().frame_index == 2);
  REQUIRE(w.samples().back().frame_index == 4);
}

TEST_CASE("watch window rejects non-increasing frame indices", "[trend]") {
  WatchWindow w(5);
  w.push({1.0, 10, false});
  REQUIRE_THROWS_AS(w.push({2.0, 10, false}), std::invalid_argument);
  REQUIRE_THROWS_AS(w.push({2.0, 9, false}), std::invalid_argument);
  REQUIRE_THROWS_AS(WatchWindow(0), std::invalid_argument);
}

TEST_CASE("imputation carries the last measured value forward", "[trend]") {
  WatchWindow w(10);
  REQUIRE_FALSE(impute_missing(w, 0).has_value());  // nothing to carry yet

  w.push({42.0, 0, false});
  const auto first = impute_missing(w, 1);
  REQUIRE(first);
  REQUIRE(first->value == 42.0);
  REQUIRE(first->is_imputed);
  REQUIRE(first->frame_index == 1);

  w.push({7.0, 1, false});
  const auto a = impute_missing(w, 2);
  REQUIRE(a);
  w.push(*a);
  const auto b = impute_missing(w, 3);  // second gap in a row
  REQUIRE(b);
  REQUIRE(a->value == 7.0);
  REQUIRE(b->value == 7.0);  // still the last *measured* value
}

TEST_CASE("smoothing shrinks symmetrically at the boundaries", "[trend]") {
  REQUIRE(smooth({5, 5, 5, 5}, 3) == std::vector<double>{5, 5, 5, 5});
  REQUIRE(smooth({0, 0, 0, 3, 3, 3}, 3) == std::vector<double>{0, 0, 1, 2, 3, 3});
  const std::vector<double> any = {3.5, -1.0, 2.25, 9.0};
  REQUIRE(smooth(any, 1) == any);
  REQUIRE_THROWS_AS(smooth(any, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(smooth(any, 5), std::invalid_argument);
}

TEST_CASE("smoothing never widens the value range", "[trend]") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(5 + rng() % 30);
    for (double& x : v) x = uniform_in(rng, -50.0, 50.0);
    const auto lohi = std::minmax_element(v.begin(), v.end());
    for (int L : {1, 3, 5}) {
      for (double s : smooth(v, L)) {
        REQUIRE(s >= *lohi.first - 1e-12);
        REQUIRE(s <= *lohi.second + 1e-12);
      }
    }
  }
}

TEST_CASE("slope classification honors the inclusive dead-band", "[trend]") {
  REQUIRE(classify(0.0, 0.1) == Label::NO_DEP);
  REQUIRE(classify(0.5, 0.1) == Label::POSITIVE_DEP);
  REQUIRE(classify(-0.5, 0.1) == Label::NEGATIVE_DEP);
  REQUIRE(classify(0.1, 0.1) == Label::NO_DEP);    // boundary is inclusive
  REQUIRE(classify(-0.1, 0.1) == Label::NO_DEP);
  REQUIRE_THROWS_AS(classify(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("classification is odd in the slope", "[trend]") {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5000; ++i) {
    const double delta = std::pow(10.0, uniform_in(rng, -6.0, 1.0));
    const double b = uniform_in(rng, -3.0, 3.0) * delta;
    const Label pos = classify(b, delta);
    const Label neg = classify(-b, delta);
    if (pos == Label::NO_DEP) REQUIRE(neg == Label::NO_DEP);
    if (pos == Label::POSITIVE_DEP) REQUIRE(neg == Label::NEGATIVE_DEP);
    if (pos == Label::NEGATIVE_DEP) REQUIRE(neg == Label::POSITIVE_DEP);
  }
}

TEST_CASE("trend fit recovers exact lines", "[trend]") {
  AnalysisConfig cfg;
  cfg.smoothing_length = 1;

  const TrendResult unit = fit_trend(window_of({0, 1, 2, 3}), cfg);
  REQUIRE(std::abs(unit.b - 1.0) < 1e-12);
  REQUIRE(std::abs(unit.c - 0.0) < 1e-12);
  REQUIRE(unit.label == Label::POSITIVE_DEP);
  REQUIRE(unit.n_points == 4);

  const TrendResult flat = fit_trend(window_of({4.25, 4.25, 4.25, 4.25, 4.25}), cfg);
  REQUIRE(flat.b == 0.0);
  REQUIRE(flat.label == Label::NO_DEP);

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const double slope = uniform_in(rng, -20.0, 20.0);
    const double intercept = uniform_in(rng, -100.0, 100.0);
    const int n = 2 + static_cast<int>(rng() % 28);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = slope * i + intercept;
    const TrendResult r = fit_trend(window_of(v), cfg);
    REQUIRE(std::abs(r.b - slope) <= 1e-9 * std::max(1.0, std::abs(slope)));
    REQUIRE(std::abs(r.c - intercept) <= 1e-9 * std::max(1.0, std::abs(intercept)));
  }
}

TEST_CASE("hand-computed slope example", "[trend]") {
  AnalysisConfig cfg;
  cfg.smoothing_length = 1;
  const TrendResult r = fit_trend(window_of({1, 3, 2, 5, 4, 7}), cfg);
  REQUIRE(std::abs(r.b - 18.0 / 17.5) < 1e-12);
}

TEST_CASE("trend fit needs at least two samples", "[trend]") {
  AnalysisConfig cfg;
  cfg.smoothing_length = 1;
  REQUIRE_THROWS_AS(fit_trend(window_of({1.0}), cfg), InsufficientDataError);
  REQUIRE_THROWS_AS(least_squares_slope({3.0}), InsufficientDataError);
}

TEST_CASE("fit label always matches classify of its slope", "[trend]") {
  std::mt19937_64 rng(44);
  AnalysisConfig cfg;  // L = 5 on noisy data
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(8 + rng() % 20);
    for (double& x : v) x = uniform_in(rng, 0.0, 10.0);
    const TrendResult r = fit_trend(window_of(v), cfg);
    REQUIRE(r.label == classify(r.b, cfg.delta));
  }
}

TEST_CASE("analysis config validation", "[trend]") {
  AnalysisConfig c;
  c.k = 2;
  REQUIRE_THROWS_AS(validate_analysis(c), std::invalid_argument);
  c = AnalysisConfig{};
  c.smoothing_length = 4;
  REQUIRE_THROWS_AS(validate_analysis(c), std::invalid_argument);
  c = AnalysisConfig{};
  c.smoothing_length = 31;  // exceeds k = 30
  REQUIRE_THROWS_AS(validate_analysis(c), std::invalid_argument);
  c = AnalysisConfig{};
  c.delta = 0.0;
  REQUIRE_THROWS_AS(validate_analysis(c), std::invalid_argument);
}
