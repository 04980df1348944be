#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace depscope {

// Planar interdigitated electrode array seen from above: parallel finger
// stripes along y, alternating with gaps, inside a rectangular field of view.
// All lengths in micrometers; the raster scale converts to pixels.
struct TestbedGeometry {
  double fov_width_um = 320.0;
  double fov_height_um = 240.0;
  double pixel_scale_um = 0.5;    // micrometers per pixel edge
  int finger_count = 12;
  double finger_width_um = 70.0;
  double finger_gap_um = 70.0;
  double pattern_offset_um = 55.0;  // x of the first finger's left edge
  double wall_margin_um = 3.0;      // keeps beads clear of the frame border
  double edge_standoff_um = 0.5;    // closest approach to an electrode edge
};

inline int raster_width(const TestbedGeometry& g) {
  return static_cast<int>(std::lround(g.fov_width_um / g.pixel_scale_um));
}
inline int raster_height(const TestbedGeometry& g) {
  return static_cast<int>(std::lround(g.fov_height_um / g.pixel_scale_um));
}

// Partition of [0, fov_width] into maximal runs of electrode / gap.
// bounds has n+1 entries for n regions; edge_at[i] is true when bounds[i]
// is a real electrode edge rather than the field-of-view wall.
struct ElectrodeLayout {
  std::vector<double> bounds;
  std::vector<bool> edge_at;
  std::vector<bool> finger_region;

  std::size_t region_count() const { return finger_region.size(); }
};

inline void validate_geometry(const TestbedGeometry& g) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("geometry: " + msg); };
  if (!(g.fov_width_um > 0.0) || !(g.fov_height_um > 0.0)) fail("field of view must be positive");
  if (!(g.pixel_scale_um > 0.0)) fail("pixel scale must be positive");
  if (g.finger_count < 2) fail("need at least two fingers");
  if (!(g.finger_width_um > 0.0)) fail("finger width must be positive");
  if (!(g.finger_gap_um > 0.0)) fail("finger gap must be positive");
  if (g.wall_margin_um < 0.0 || g.edge_standoff_um < 0.0) fail("margins must be non-negative");
  // At least one gap must lie fully inside the field of view, or there is
  // nothing for the observation window to latch onto.
  const double period = g.finger_width_um + g.finger_gap_um;
  bool full_gap = false;
  for (int i = 0; i + 1 < g.finger_count; ++i) {
    const double gap_lo = g.pattern_offset_um + i * period + g.finger_width_um;
    const double gap_hi = gap_lo + g.finger_gap_um;
    if (gap_lo >= 0.0 && gap_hi <= g.fov_width_um) {
      full_gap = true;
      break;
    }
  }
  if (!full_gap) fail("no complete gap inside the field of view");
}

inline ElectrodeLayout make_layout(const TestbedGeometry& g) {
  const double W = g.fov_width_um;
  const double period = g.finger_width_um + g.finger_gap_um;
  ElectrodeLayout lay;
  lay.bounds.push_back(0.0);
  lay.edge_at.push_back(false);
  for (int i = 0; i < g.finger_count; ++i) {
    const double s = g.pattern_offset_um + i * period;
    const double e = s + g.finger_width_um;
    for (double x : {s, e}) {
      if (x > 0.0 && x < W && x > lay.bounds.back()) {
        lay.bounds.push_back(x);
        lay.edge_at.push_back(true);
      }
    }
  }
  if (lay.bounds.back() < W) {
    lay.bounds.push_back(W);
    lay.edge_at.push_back(false);
  }
  // Classify each region by its midpoint.
  for (std::size_t r = 0; r + 1 < lay.bounds.size(); ++r) {
    const double mid = 0.5 * (lay.bounds[r] + lay.bounds[r + 1]);
    const double u = mid - g.pattern_offset_um;
    const int i = static_cast<int>(std::floor(u / period));
    const double frac = u - i * period;
    lay.finger_region.push_back(i >= 0 && i < g.finger_count && frac > 0.0 &&
                                frac < g.finger_width_um);
  }
  return lay;
}

struct RegionBounds {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_is_edge = false;
  bool hi_is_edge = false;
  bool is_finger = false;
};

// Region containing x. A bead sitting exactly on an electrode edge is
// assigned to the adjacent gap, never the electrode.
inline RegionBounds region_at(const ElectrodeLayout& lay, double x) {
  const auto& b = lay.bounds;
  auto it = std::upper_bound(b.begin(), b.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - b.begin());
  if (hi == 0) hi = 1;
  if (hi >= b.size()) hi = b.size() - 1;
  std::size_t r = hi - 1;
  if (x == b[r] && lay.finger_region[r] && r > 0) --r;
  return {b[r], b[r + 1], lay.edge_at[r], lay.edge_at[r + 1], lay.finger_region[r] != 0};
}

struct GapSpan {
  double lo = 0.0;
  double hi = 0.0;
  double center() const { return 0.5 * (lo + hi); }
};

// The complete gap nearest the horizontal center of the field of view.
inline GapSpan central_gap(const TestbedGeometry& g) {
  const double period = g.finger_width_um + g.finger_gap_um;
  const double cx = 0.5 * g.fov_width_um;
  GapSpan best{};
  double best_dist = -1.0;
  for (int i = 0; i + 1 < g.finger_count; ++i) {
    const double lo = g.pattern_offset_um + i * period + g.finger_width_um;
    const double hi = lo + g.finger_gap_um;
    if (lo < 0.0 || hi > g.fov_width_um) continue;
    const double d = std::abs(0.5 * (lo + hi) - cx);
    if (best_dist < 0.0 || d < best_dist) {
      best_dist = d;
      best = {lo, hi};
    }
  }
  if (best_dist < 0.0) throw std::invalid_argument("central_gap: no complete gap in view");
  return best;
}

}  // namespace depscope
