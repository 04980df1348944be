#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "depscope/geometry.hpp"
#include "depscope/io.hpp"
#include "depscope/rng.hpp"

namespace depscope {

// Frequency-dependent drift toward or away from electrode edges, shaped like
// the real part of the Clausius-Mossotti factor: below the crossover
// frequency beads run toward the nearest edge, above it they retreat toward
// the middle of their region. polarity = -1 flips the medium/particle pairing.
struct DriftModel {
  double crossover_freq_hz = 500e3;
  double max_speed_um_per_frame = 0.09;
  double diffusion_sigma_um = 0.15;
  double polarity = 1.0;
  std::uint64_t rng_seed = 1;
};

inline void validate_drift(const DriftModel& m) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("drift: ") + msg); };
  if (!(m.crossover_freq_hz > 0.0)) fail("crossover frequency must be positive");
  if (m.max_speed_um_per_frame < 0.0) fail("max speed must be non-negative");
  if (m.diffusion_sigma_um < 0.0) fail("diffusion sigma must be non-negative");
  if (m.polarity != 1.0 && m.polarity != -1.0) fail("polarity must be +1 or -1");
}

// Signed drift speed at frequency f. Positive = edge-seeking.
inline double drift_velocity(double f_hz, const DriftModel& m) {
  if (!(f_hz > 0.0)) throw std::invalid_argument("drift_velocity: frequency must be positive");
  const double fc2 = m.crossover_freq_hz * m.crossover_freq_hz;
  const double f2 = f_hz * f_hz;
  return m.polarity * m.max_speed_um_per_frame * (fc2 - f2) / (fc2 + f2);
}

struct Bead {
  double x_um = 0.0;
  double y_um = 0.0;
  double radius_um = 1.5;  // 3 um diameter beads
};

struct TestbedState {
  std::int64_t frame_index = 0;
  double applied_freq_hz = 10e3;
  std::vector<Bead> beads;
};

// Uniformly scattered beads, clear of walls; deterministic in the seed.
// count = 0 yields an empty testbed.
inline TestbedState seed_beads(const TestbedGeometry& g, int count, std::uint64_t seed,
                               double initial_freq_hz = 10e3) {
  validate_geometry(g);
  if (count < 0) throw std::invalid_argument("seed_beads: count must be non-negative");
  std::mt19937_64 rng(mix64(seed, 0xb15d5eedULL));
  const double mx = std::min(g.wall_margin_um, 0.5 * g.fov_width_um);
  const double my = std::min(g.wall_margin_um, 0.5 * g.fov_height_um);
  TestbedState st;
  st.applied_freq_hz = initial_freq_hz;
  st.beads.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Bead b;
    b.x_um = uniform_in(rng, mx, g.fov_width_um - mx);
    b.y_um = uniform_in(rng, my, g.fov_height_um - my);
    st.beads.push_back(b);
  }
  return st;
}

namespace detail {

inline double move_toward(double x, double target, double dist) {
  const double d = target - x;
  if (d > dist) return x + dist;
  if (d < -dist) return x - dist;
  return target;
}

}  // namespace detail

// One simulation tick. Pure: the output depends only on the arguments, and
// the per-frame noise stream is derived from (seed, frame_index), so replays
// from any stored state are reproducible.
inline TestbedState step(const TestbedState& state, const DriftModel& model,
                         const TestbedGeometry& geom) {
  validate_geometry(geom);
  validate_drift(model);
  const ElectrodeLayout lay = make_layout(geom);
  const double v = drift_velocity(state.applied_freq_hz, model);
  std::mt19937_64 rng(mix64(model.rng_seed, static_cast<std::uint64_t>(state.frame_index)));

  TestbedState next;
  next.frame_index = state.frame_index + 1;
  next.applied_freq_hz = state.applied_freq_hz;
  next.beads.reserve(state.beads.size());

  for (const Bead& bead : state.beads) {
    const RegionBounds rb = region_at(lay, bead.x_um);
    double lo = rb.lo + (rb.lo_is_edge ? geom.edge_standoff_um : geom.wall_margin_um);
    double hi = rb.hi - (rb.hi_is_edge ? geom.edge_standoff_um : geom.wall_margin_um);
    if (lo > hi) lo = hi = 0.5 * (rb.lo + rb.hi);
    const double mid = 0.5 * (lo + hi);

    double x = bead.x_um;
    if (v >= 0.0) {
      double target = x;  // region with no electrode edge: nothing to seek
      if (rb.lo_is_edge && rb.hi_is_edge)
        target = (x - rb.lo <= rb.hi - x) ? lo : hi;
      else if (rb.lo_is_edge)
        target = lo;
      else if (rb.hi_is_edge)
        target = hi;
      x = detail::move_toward(x, target, v);
    } else {
      double target = x;
      if (rb.lo_is_edge && rb.hi_is_edge)
        target = mid;
      else if (rb.lo_is_edge)
        target = hi;
      else if (rb.hi_is_edge)
        target = lo;
      x = detail::move_toward(x, target, -v);
    }

    const GaussianPair n = gaussian_pair(rng);
    x += model.diffusion_sigma_um * n.a;
    double y = bead.y_um + model.diffusion_sigma_um * n.b;

    // Beads never cross an electrode edge and never leave the walls.
    x = std::clamp(x, lo, hi);
    y = std::clamp(y, geom.wall_margin_um, geom.fov_height_um - geom.wall_margin_um);
    next.beads.push_back({x, y, bead.radius_um});
  }
  return next;
}

inline void write_state_csv_header(std::ostream& out) { out << "frame_index,bead_id,x_um,y_um\n"; }

inline void write_state_csv(std::ostream& out, const TestbedState& st) {
  for (std::size_t i = 0; i < st.beads.size(); ++i) {
    out << format_int(st.frame_index) << ',' << format_int(static_cast<long long>(i)) << ','
        << format_double(st.beads[i].x_um) << ',' << format_double(st.beads[i].y_um) << '\n';
  }
}

}  // namespace depscope
