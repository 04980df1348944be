#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depscope/vision.hpp"

namespace depscope {

enum class Label { NO_DEP, POSITIVE_DEP, NEGATIVE_DEP };

inline const char* to_string(Label l) {
  switch (l) {
    case Label::POSITIVE_DEP: return "POSITIVE_DEP";
    case Label::NEGATIVE_DEP: return "NEGATIVE_DEP";
    default: return "NO_DEP";
  }
}

struct FeatureSample {
  double value = 0.0;  // average absolute distance to the reference line, px
  std::int64_t frame_index = 0;
  bool is_imputed = false;
};

struct AnalysisConfig {
  int k = 30;                // watch window capacity
  int smoothing_length = 5;  // odd; uniform filter width
  double delta = 0.05;       // slope dead-band, px per sampled tick
};

inline void validate_analysis(const AnalysisConfig& c) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("analysis: ") + msg); };
  if (c.k < 3) fail("window length k must be >= 3");
  if (c.smoothing_length < 1 || c.smoothing_length % 2 == 0)
    fail("smoothing length must be odd and >= 1");
  if (c.smoothing_length > c.k) fail("smoothing length must not exceed k");
  if (!(c.delta > 0.0)) fail("delta must be positive");
}

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FIFO of the most recent feature samples; evicts strictly oldest-first.
class WatchWindow {
 public:
  explicit WatchWindow(int k) : k_(k) {
    if (k < 1) throw std::invalid_argument("watch window: capacity must be positive");
  }

  void push(const FeatureSample& s) {
    if (!samples_.empty() && s.frame_index <= samples_.back().frame_index)
      throw std::invalid_argument("watch window: frame_index must be strictly increasing");
    samples_.push_back(s);
    if (samples_.size() > static_cast<std::size_t>(k_)) samples_.pop_front();
  }

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int capacity() const { return k_; }
  const std::deque<FeatureSample>& samples() const { return samples_; }

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const FeatureSample& s : samples_) out.push_back(s.value);
    return out;
  }

  // Most recent sample that was measured rather than imputed.
  std::optional<FeatureSample> last_real() const {
    for (auto it = samples_.rbegin(); it != samples_.rend(); ++it)
      if (!it->is_imputed) return *it;
    return std::nullopt;
  }

 private:
  int k_;
  std::deque<FeatureSample> samples_;
};

// X_t = sum |x_n - r| / N over the particle set; empty set means the
// detector came up blank this tick and the caller should impute.
inline std::optional<FeatureSample> extract_feature(const ParticleSet& ps, double r) {
  if (r < 0.0) throw std::invalid_argument("extract_feature: reference must be non-negative");
  if (ps.particles.empty()) return std::nullopt;
  double sum = 0.0;
  for (const Particle& p : ps.particles) sum += std::abs(p.x_px - r);
  FeatureSample s;
  s.value = sum / static_cast<double>(ps.particles.size());
  s.frame_index = ps.frame_index;
  s.is_imputed = false;
  return s;
}

// Carry-forward imputation: stands in for a missing X_t with the latest
// measured value. Yields nothing while no measured sample exists yet.
inline std::optional<FeatureSample> impute_missing(const WatchWindow& w,
                                                   std::int64_t frame_index) {
  const auto real = w.last_real();
  if (!real) return std::nullopt;
  FeatureSample s;
  s.value = real->value;
  s.frame_index = frame_index;
  s.is_imputed = true;
  return s;
}

// Centered moving average with uniform weights 1/L; near the ends the window
// shrinks symmetrically so the output stays centered and length-preserving.
inline std::vector<double> smooth(const std::vector<double>& v, int L) {
  if (L < 1 || L % 2 == 0) throw std::invalid_argument("smooth: L must be odd and >= 1");
  if (static_cast<std::size_t>(L) > v.size())
    throw std::invalid_argument("smooth: L exceeds input length");
  const int n = static_cast<int>(v.size());
  const int h = L / 2;
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    const int r = std::min({h, i, n - 1 - i});
    double s = 0.0;
    for (int u = i - r; u <= i + r; ++u) s += v[static_cast<std::size_t>(u)];
    out[static_cast<std::size_t>(i)] = s / (2 * r + 1);
  }
  return out;
}

inline Label classify(double b, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("classify: delta must be positive");
  if (std::abs(b) <= delta) return Label::NO_DEP;
  return b > delta ? Label::POSITIVE_DEP : Label::NEGATIVE_DEP;
}

struct TrendResult {
  double b = 0.0;  // px per sampled tick; the collective particle velocity
  double c = 0.0;
  Label label = Label::NO_DEP;
  int n_points = 0;
};

// Least-squares slope over ordinals 0..n-1: b = sum((x-mx)(y-my)) / sum((x-mx)^2).
inline double least_squares_slope(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  if (n < 2) throw InsufficientDataError("trend fit: need at least 2 samples");
  const double mx = 0.5 * (n - 1);
  double my = 0.0;
  for (double v : y) my += v;
  my /= n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = i - mx;
    num += dx * (y[static_cast<std::size_t>(i)] - my);
    den += dx * dx;
  }
  return num / den;
}

// Fits the linear trend model to the (smoothed) window contents.
inline TrendResult fit_trend(const WatchWindow& w, const AnalysisConfig& cfg) {
  validate_analysis(cfg);
  if (w.size() < 2) throw InsufficientDataError("trend fit: need at least 2 samples");
  const std::vector<double> y = smooth(w.values(), cfg.smoothing_length);
  const int n = static_cast<int>(y.size());
  TrendResult r;
  r.n_points = n;
  r.b = least_squares_slope(y);
  double my = 0.0;
  for (double v : y) my += v;
  my /= n;
  r.c = my - r.b * 0.5 * (n - 1);
  r.label = classify(r.b, cfg.delta);
  return r;
}

}  // namespace depscope
