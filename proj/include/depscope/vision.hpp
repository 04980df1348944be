#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "depscope/frame.hpp"
#include "depscope/io.hpp"

namespace depscope {

struct HcdParams {
  double param_1 = 100.0;  // edge-map high threshold on gradient magnitude (low = param_1/2)
  double param_2 = 18.0;   // minimum accumulator votes for a circle center
  int min_radius = 4;
  int max_radius = 9;
  double min_center_distance = 6.0;  // dedup spacing between accepted centers
};

inline void validate_hcd(const HcdParams& p) {
  auto fail = [](const char* msg) { throw std::invalid_argument(std::string("detector: ") + msg); };
  if (!(p.param_1 > 0.0)) fail("param_1 must be positive");
  if (!(p.param_2 > 0.0)) fail("param_2 must be positive");
  if (!(p.min_radius > 0) || p.min_radius > p.max_radius)
    fail("need 0 < min_radius <= max_radius");
  if (!(p.min_center_distance > 0.0)) fail("min_center_distance must be positive");
}

struct Particle {
  double x_px = 0.0;  // continuous pixel coordinates (pixel i spans [i, i+1))
  double y_px = 0.0;
  double radius_px = 0.0;
  int vote_score = 0;
};

// Detections of one frame, ordered by descending vote_score with (x, y)
// tie-break; pairwise center distances >= min_center_distance.
struct ParticleSet {
  std::vector<Particle> particles;
  std::int64_t frame_index = 0;
};

struct ObservationWindow {
  double left_edge_x = 0.0;   // inner edges of the electrodes bounding the gap
  double right_edge_x = 0.0;
  double reference_x = 0.0;   // midline between them
};

struct WindowDetectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// 3x3 binomial blur (1 2 1 separable), rounded back to 8 bits; borders clamp.
inline std::vector<std::uint8_t> binomial_blur(const Frame& f) {
  const int W = f.width, H = f.height;
  std::vector<std::uint16_t> row(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int xl = std::max(0, x - 1), xr = std::min(W - 1, x + 1);
      row[static_cast<std::size_t>(y) * W + x] =
          static_cast<std::uint16_t>(f.at(xl, y) + 2 * f.at(x, y) + f.at(xr, y));
    }
  }
  std::vector<std::uint8_t> out(static_cast<std::size_t>(W) * H);
  for (int y = 0; y < H; ++y) {
    const int yu = std::max(0, y - 1), yd = std::min(H - 1, y + 1);
    for (int x = 0; x < W; ++x) {
      const unsigned s = row[static_cast<std::size_t>(yu) * W + x] +
                         2u * row[static_cast<std::size_t>(y) * W + x] +
                         row[static_cast<std::size_t>(yd) * W + x];
      out[static_cast<std::size_t>(y) * W + x] = static_cast<std::uint8_t>((s + 8) / 16);
    }
  }
  return out;
}

struct EdgePixel {
  int x;
  int y;
  float dx;  // unit gradient direction
  float dy;
};

}  // namespace detail

// Hough gradient method. Pipeline: binomial blur -> Sobel gradients ->
// magnitude-squared thresholding with non-maximum suppression along the
// gradient (4 sectors, no atan2) -> hysteresis edge linking (high = param_1,
// low = param_1/2) -> every edge pixel votes along +/- its gradient direction
// at each integer radius into a 2-D center accumulator -> accumulator local
// maxima >= param_2, deduplicated by min_center_distance, refined by 3x3 vote
// centroid -> radius = mode of rounded edge-pixel distances in
// [min_radius, max_radius] (ties take the smaller radius).
inline ParticleSet detect_circles(const Frame& f, const HcdParams& p) {
  validate_hcd(p);
  ParticleSet result;
  result.frame_index = f.frame_index;
  const int W = f.width, H = f.height;
  if (W < 3 || H < 3) return result;

  const std::vector<std::uint8_t> blur = detail::binomial_blur(f);
  auto B = [&](int x, int y) -> int { return blur[static_cast<std::size_t>(y) * W + x]; };

  // Sobel; border ring left at zero gradient.
  std::vector<std::int16_t> gx(static_cast<std::size_t>(W) * H, 0);
  std::vector<std::int16_t> gy(static_cast<std::size_t>(W) * H, 0);
  std::vector<std::int32_t> mag2(static_cast<std::size_t>(W) * H, 0);
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      const int sx = (B(x + 1, y - 1) + 2 * B(x + 1, y) + B(x + 1, y + 1)) -
                     (B(x - 1, y - 1) + 2 * B(x - 1, y) + B(x - 1, y + 1));
      const int sy = (B(x - 1, y + 1) + 2 * B(x, y + 1) + B(x + 1, y + 1)) -
                     (B(x - 1, y - 1) + 2 * B(x, y - 1) + B(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      gx[i] = static_cast<std::int16_t>(sx);
      gy[i] = static_cast<std::int16_t>(sy);
      mag2[i] = sx * sx + sy * sy;
    }
  }

  const double high2 = p.param_1 * p.param_1;
  const double low2 = (p.param_1 / 2.0) * (p.param_1 / 2.0);

  // Non-maximum suppression along the gradient direction. Sector picked by
  // comparing |gy|/|gx| against tan(22.5) and tan(67.5).
  constexpr double kTanLo = 0.41421356237309503;
  constexpr double kTanHi = 2.414213562373095;
  std::vector<std::uint8_t> state(static_cast<std::size_t>(W) * H, 0);  // 1 weak, 2 strong
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      const double m = mag2[i];
      if (m < low2) continue;
      const double ax = std::abs(static_cast<double>(gx[i]));
      const double ay = std::abs(static_cast<double>(gy[i]));
      int nx1, ny1, nx2, ny2;
      if (ay <= kTanLo * ax) {
        nx1 = x - 1; ny1 = y; nx2 = x + 1; ny2 = y;
      } else if (ay >= kTanHi * ax) {
        nx1 = x; ny1 = y - 1; nx2 = x; ny2 = y + 1;
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        nx1 = x - 1; ny1 = y - 1; nx2 = x + 1; ny2 = y + 1;
      } else {
        nx1 = x - 1; ny1 = y + 1; nx2 = x + 1; ny2 = y - 1;
      }
      if (m < mag2[static_cast<std::size_t>(ny1) * W + nx1] ||
          m < mag2[static_cast<std::size_t>(ny2) * W + nx2])
        continue;
      state[i] = m >= high2 ? 2 : 1;
    }
  }

  // Hysteresis: weak survivors join only when 8-connected to a strong chain.
  std::vector<std::uint8_t> edge(static_cast<std::size_t>(W) * H, 0);
  std::vector<std::int32_t> stack;
  stack.reserve(1024);
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (state[i] != 2 || edge[i]) continue;
      edge[i] = 1;
      stack.push_back(static_cast<std::int32_t>(i));
      while (!stack.empty()) {
        const std::int32_t j = stack.back();
        stack.pop_back();
        const int jx = j % W, jy = j / W;
        for (int oy = -1; oy <= 1; ++oy) {
          for (int ox = -1; ox <= 1; ++ox) {
            const int ux = jx + ox, uy = jy + oy;
            if (ux < 1 || uy < 1 || ux + 1 >= W || uy + 1 >= H) continue;
            const std::size_t u = static_cast<std::size_t>(uy) * W + ux;
            if (state[u] && !edge[u]) {
              edge[u] = 1;
              stack.push_back(static_cast<std::int32_t>(u));
            }
          }
        }
      }
    }
  }

  std::vector<detail::EdgePixel> edges;
  edges.reserve(4096);
  for (int y = 1; y + 1 < H; ++y) {
    for (int x = 1; x + 1 < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      if (!edge[i]) continue;
      const float inv = 1.0f / std::sqrt(static_cast<float>(mag2[i]));
      edges.push_back({x, y, gx[i] * inv, gy[i] * inv});
    }
  }
  if (edges.empty()) return result;

  // Center voting along +/- gradient at every candidate radius.
  std::vector<std::int32_t> acc(static_cast<std::size_t>(W) * H, 0);
  for (const auto& e : edges) {
    for (int r = p.min_radius; r <= p.max_radius; ++r) {
      for (int s = -1; s <= 1; s += 2) {
        const int cx = static_cast<int>(std::lround(e.x + s * r * e.dx));
        const int cy = static_cast<int>(std::lround(e.y + s * r * e.dy));
        if (cx < 0 || cy < 0 || cx >= W || cy >= H) continue;
        ++acc[static_cast<std::size_t>(cy) * W + cx];
      }
    }
  }

  struct Candidate {
    int votes;
    int x;
    int y;
  };
  std::vector<Candidate> cands;
  const int need = static_cast<int>(std::ceil(p.param_2));
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const int v = acc[static_cast<std::size_t>(y) * W + x];
      if (v < need) continue;
      bool peak = true;
      for (int oy = -1; oy <= 1 && peak; ++oy) {
        for (int ox = -1; ox <= 1; ++ox) {
          if (!ox && !oy) continue;
          const int ux = x + ox, uy = y + oy;
          if (ux < 0 || uy < 0 || ux >= W || uy >= H) continue;
          if (acc[static_cast<std::size_t>(uy) * W + ux] > v) {
            peak = false;
            break;
          }
        }
      }
      if (peak) cands.push_back({v, x, y});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.votes != b.votes) return a.votes > b.votes;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });

  std::vector<Candidate> kept;
  const double min_d2 = p.min_center_distance * p.min_center_distance;
  for (const auto& c : cands) {
    bool ok = true;
    for (const auto& k : kept) {
      const double dx = c.x - k.x, dy = c.y - k.y;
      if (dx * dx + dy * dy < min_d2) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c);
  }

  // Index edge pixels by row for the radius scan.
  std::vector<std::vector<std::int32_t>> edges_by_row(static_cast<std::size_t>(H));
  for (std::size_t k = 0; k < edges.size(); ++k)
    edges_by_row[static_cast<std::size_t>(edges[k].y)].push_back(static_cast<std::int32_t>(k));

  for (const auto& c : kept) {
    // Sub-cell center refinement: vote-weighted centroid of the 3x3 block.
    double wsum = 0.0, wx = 0.0, wy = 0.0;
    for (int oy = -1; oy <= 1; ++oy) {
      for (int ox = -1; ox <= 1; ++ox) {
        const int ux = c.x + ox, uy = c.y + oy;
        if (ux < 0 || uy < 0 || ux >= W || uy >= H) continue;
        const double v = acc[static_cast<std::size_t>(uy) * W + ux];
        wsum += v;
        wx += v * ux;
        wy += v * uy;
      }
    }
    const double rx = wsum > 0.0 ? wx / wsum : c.x;
    const double ry = wsum > 0.0 ? wy / wsum : c.y;

    std::vector<int> hist(static_cast<std::size_t>(p.max_radius) + 1, 0);
    const int y_lo = std::max(0, static_cast<int>(std::floor(ry)) - p.max_radius - 1);
    const int y_hi = std::min(H - 1, static_cast<int>(std::ceil(ry)) + p.max_radius + 1);
    for (int y = y_lo; y <= y_hi; ++y) {
      for (std::int32_t k : edges_by_row[static_cast<std::size_t>(y)]) {
        const double dx = edges[static_cast<std::size_t>(k)].x - rx;
        const double dy = edges[static_cast<std::size_t>(k)].y - ry;
        const int r = static_cast<int>(std::lround(std::sqrt(dx * dx + dy * dy)));
        if (r >= p.min_radius && r <= p.max_radius) ++hist[static_cast<std::size_t>(r)];
      }
    }
    int best_r = p.min_radius;
    int best_n = -1;
    for (int r = p.min_radius; r <= p.max_radius; ++r) {
      if (hist[static_cast<std::size_t>(r)] > best_n) {
        best_n = hist[static_cast<std::size_t>(r)];
        best_r = r;
      }
    }

    Particle out;
    out.x_px = rx + 0.5;  // grid index -> continuous pixel coordinates
    out.y_px = ry + 0.5;
    out.radius_px = best_r;
    out.vote_score = c.votes;
    result.particles.push_back(out);
  }
  return result;
}

// Locates the watched gap from the column-mean intensity profile: the
// strongest adjacent falling/rising gradient pair brackets it. Frames with
// fewer than two strong vertical transitions are rejected.
inline ObservationWindow detect_observation_window(const Frame& f) {
  const int W = f.width, H = f.height;
  if (W < 8 || H < 1) throw WindowDetectionError("window: frame too small");

  std::vector<double> mean(static_cast<std::size_t>(W), 0.0);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) mean[static_cast<std::size_t>(x)] += f.at(x, y);
  for (double& v : mean) v /= H;

  // Width-3 smoothing (shrinking at the borders), then central differences.
  std::vector<double> prof(static_cast<std::size_t>(W), 0.0);
  for (int x = 0; x < W; ++x) {
    const int lo = std::max(0, x - 1), hi = std::min(W - 1, x + 1);
    double s = 0.0;
    for (int u = lo; u <= hi; ++u) s += mean[static_cast<std::size_t>(u)];
    prof[static_cast<std::size_t>(x)] = s / (hi - lo + 1);
  }
  std::vector<double> grad(static_cast<std::size_t>(W), 0.0);
  double gmax = 0.0;
  for (int x = 1; x + 1 < W; ++x) {
    grad[static_cast<std::size_t>(x)] =
        prof[static_cast<std::size_t>(x + 1)] - prof[static_cast<std::size_t>(x - 1)];
    gmax = std::max(gmax, std::abs(grad[static_cast<std::size_t>(x)]));
  }
  if (gmax < 8.0) throw WindowDetectionError("window: no vertical intensity transitions");
  const double thr = std::max(4.0, 0.5 * gmax);

  // Collapse runs of same-signed strong gradient into single transitions.
  struct Transition {
    int col;
    double strength;
    bool rising;
  };
  std::vector<Transition> trans;
  int x = 1;
  while (x + 1 < W) {
    if (std::abs(grad[static_cast<std::size_t>(x)]) < thr) {
      ++x;
      continue;
    }
    const bool rising = grad[static_cast<std::size_t>(x)] > 0.0;
    int best = x;
    double best_g = std::abs(grad[static_cast<std::size_t>(x)]);
    int u = x;
    while (u + 1 < W && std::abs(grad[static_cast<std::size_t>(u)]) >= thr &&
           (grad[static_cast<std::size_t>(u)] > 0.0) == rising) {
      if (std::abs(grad[static_cast<std::size_t>(u)]) > best_g) {
        best_g = std::abs(grad[static_cast<std::size_t>(u)]);
        best = u;
      }
      ++u;
    }
    trans.push_back({best, best_g, rising});
    x = u;
  }

  // Electrodes are brighter than the gap, so the gap sits between a falling
  // transition and the next rising one. Pick the strongest such pair, with
  // proximity to the frame midline as the tie-break.
  bool found = false;
  int best_l = 0, best_r = 0;
  double best_score = -1.0, best_centering = 0.0;
  for (std::size_t i = 0; i + 1 < trans.size(); ++i) {
    if (trans[i].rising || !trans[i + 1].rising) continue;
    if (trans[i + 1].col - trans[i].col < 3) continue;
    const double score = std::min(trans[i].strength, trans[i + 1].strength);
    const double centering =
        std::abs(0.5 * (trans[i].col + trans[i + 1].col) - 0.5 * W);
    if (!found || score > best_score ||
        (score == best_score && centering < best_centering)) {
      found = true;
      best_score = score;
      best_centering = centering;
      best_l = trans[i].col;
      best_r = trans[i + 1].col;
    }
  }
  if (!found) throw WindowDetectionError("window: fewer than two bounding transitions");

  ObservationWindow win;
  win.left_edge_x = best_l + 1.0;
  win.right_edge_x = best_r + 1.0;
  win.reference_x = 0.5 * (win.left_edge_x + win.right_edge_x);
  return win;
}

// Keeps particles whose center lies inside the window (inclusive), order
// preserved.
inline ParticleSet filter_to_window(const ParticleSet& ps, const ObservationWindow& win) {
  ParticleSet out;
  out.frame_index = ps.frame_index;
  for (const Particle& p : ps.particles)
    if (p.x_px >= win.left_edge_x && p.x_px <= win.right_edge_x) out.particles.push_back(p);
  return out;
}

inline void write_detections_csv_header(std::ostream& out) {
  out << "frame_index,particle_id,x_px,y_px,radius_px,vote_score\n";
}

inline void write_detections_csv(std::ostream& out, const ParticleSet& ps) {
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    const Particle& p = ps.particles[i];
    out << format_int(ps.frame_index) << ',' << format_int(static_cast<long long>(i)) << ','
        << format_double(p.x_px) << ',' << format_double(p.y_px) << ','
        << format_double(p.radius_px) << ',' << format_int(p.vote_score) << '\n';
  }
}

}  // namespace depscope
