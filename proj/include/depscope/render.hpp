#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "depscope/frame.hpp"
#include "depscope/geometry.hpp"
#include "depscope/rng.hpp"
#include "depscope/testbed.hpp"

namespace depscope {

// Synthetic microscope view: bright electrode stripes on a darker substrate,
// beads as anti-aliased discs, additive sensor noise. A fixed dim_fraction of
// the bead population renders out of focus: those beads only add a faint
// dim_gain-count halo that stays below the edge detector's thresholds, which
// keeps the set of detectable beads stable from frame to frame.
struct RenderParams {
  int bead_intensity = 230;
  int background_intensity = 60;
  int electrode_intensity = 140;
  double noise_sigma = 8.0;
  double bead_render_radius_px = 6.0;  // apparent optical radius, not physical size
  double dim_fraction = 0.74;
  int dim_gain = 10;
};

inline void validate_render(const RenderParams& p) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("render: ") + msg); };
  for (int lvl : {p.bead_intensity, p.background_intensity, p.electrode_intensity})
    if (lvl < 0 || lvl > 255) fail("intensities must be within 0..255");
  if (!(p.bead_render_radius_px >= 1.0)) fail("bead render radius must be >= 1 px");
  if (p.dim_fraction < 0.0 || p.dim_fraction > 1.0) fail("dim fraction must be within [0,1]");
  if (p.dim_gain < 0) fail("dim gain must be non-negative");
  if (p.noise_sigma < 0.0) fail("noise sigma must be non-negative");
}

// Pixel coverage of a disc, 2x2 supersampled: fraction of the four subsample
// points inside the radius.
inline double disc_coverage(double px, double py, double cx, double cy, double radius) {
  const double r2 = radius * radius;
  int inside = 0;
  for (double oy : {0.25, 0.75})
    for (double ox : {0.25, 0.75}) {
      const double dx = px + ox - cx;
      const double dy = py + oy - cy;
      if (dx * dx + dy * dy <= r2) ++inside;
    }
  return inside * 0.25;
}

// Blends a disc into the frame. absolute=true pulls covered pixels toward
// `level`; absolute=false adds `level` counts scaled by coverage.
inline void draw_disc(Frame& f, double cx, double cy, double radius, int level, bool absolute) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius - 1.0)));
  const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(cx + radius + 1.0)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 1.0)));
  const int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(cy + radius + 1.0)));
  const double reach2 = (radius + 1.5) * (radius + 1.5);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      if (dx * dx + dy * dy > reach2) continue;
      const double cov = disc_coverage(x, y, cx, cy, radius);
      if (cov <= 0.0) continue;
      const double base = f.at(x, y);
      const double v = absolute ? base + (level - base) * cov : base + level * cov;
      f.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
}

// True when bead index i belongs to the out-of-focus subset. Depends only on
// (seed, index), never on the frame, so membership is stable within a run.
inline bool bead_is_dim(std::uint64_t seed, std::size_t index, double dim_fraction) {
  const std::uint64_t h = mix64(mix64(seed, 0xd1bbeadULL), static_cast<std::uint64_t>(index));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < dim_fraction;
}

inline void add_frame_noise(Frame& f, double sigma, std::uint64_t stream_seed) {
  if (sigma <= 0.0) return;
  const GaussianTable& table = GaussianTable::instance();
  std::mt19937_64 rng(stream_seed);
  std::size_t i = 0;
  const std::size_t n = f.pixels.size();
  while (i < n) {
    std::uint64_t bits = rng();
    for (int k = 0; k < 4 && i < n; ++k, ++i) {
      const float g = table.sample(static_cast<std::uint16_t>(bits));
      bits >>= 16;
      const long v = std::lround(f.pixels[i] + sigma * g);
      f.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0L, 255L));
    }
  }
}

// Rasterizes a testbed state. Deterministic in (state, geometry, params,
// seed); the per-frame noise stream is derived from (seed, frame_index).
inline Frame render(const TestbedState& st, const TestbedGeometry& g, const RenderParams& p,
                    std::uint64_t seed) {
  validate_geometry(g);
  validate_render(p);
  const int W = raster_width(g);
  const int H = raster_height(g);
  Frame f(W, H, static_cast<std::uint8_t>(p.background_intensity));
  f.frame_index = st.frame_index;
  f.timestamp_ticks = st.frame_index;

  // Electrode stripes: exact per-column coverage gives a crisp 1 px ramp.
  const ElectrodeLayout lay = make_layout(g);
  for (int x = 0; x < W; ++x) {
    const double a = x * g.pixel_scale_um;
    const double b = a + g.pixel_scale_um;
    double covered = 0.0;
    for (std::size_t r = 0; r < lay.region_count(); ++r) {
      if (!lay.finger_region[r]) continue;
      covered += std::max(0.0, std::min(b, lay.bounds[r + 1]) - std::max(a, lay.bounds[r]));
    }
    const double frac = covered / g.pixel_scale_um;
    if (frac <= 0.0) continue;
    const double v =
        p.background_intensity + (p.electrode_intensity - p.background_intensity) * frac;
    const std::uint8_t byte = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    for (int y = 0; y < H; ++y) f.at(x, y) = byte;
  }

  for (std::size_t i = 0; i < st.beads.size(); ++i) {
    const double cx = st.beads[i].x_um / g.pixel_scale_um;
    const double cy = st.beads[i].y_um / g.pixel_scale_um;
    if (bead_is_dim(seed, i, p.dim_fraction))
      draw_disc(f, cx, cy, p.bead_render_radius_px, p.dim_gain, false);
    else
      draw_disc(f, cx, cy, p.bead_render_radius_px, p.bead_intensity, true);
  }

  add_frame_noise(f, p.noise_sigma, mix64(seed, static_cast<std::uint64_t>(st.frame_index)));
  return f;
}

}  // namespace depscope
