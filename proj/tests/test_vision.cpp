#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "depscope/render.hpp"
#include "depscope/vision.hpp"
#include "helpers.hpp"

using namespace depscope;
using testutil::disk_fixture;

TEST_CASE("uniform frame yields no detections", "[vision]") {
  const Frame f(200, 160, 60);
  const ParticleSet ps = detect_circles(f, HcdParams{});
  REQUIRE(ps.particles.empty());
}

TEST_CASE("a single clean disc is found with tight center and radius", "[vision]") {
  const Frame f = disk_fixture(200, 160, 100.0, 80.0, 6.0);
  const ParticleSet ps = detect_circles(f, HcdParams{});
  REQUIRE(ps.particles.size() == 1);
  REQUIRE(std::abs(ps.particles[0].x_px - 100.0) <= 2.0);
  REQUIRE(std::abs(ps.particles[0].y_px - 80.0) <= 2.0);
  REQUIRE(std::abs(ps.particles[0].radius_px - 6.0) <= 2.0);
}

TEST_CASE("detection is translation-equivariant on integer shifts", "[vision]") {
  const Frame a = disk_fixture(200, 160, 60.5, 70.5, 7.0);
  const Frame b = disk_fixture(200, 160, 67.5, 75.5, 7.0);  // shifted by (7, 5)
  const ParticleSet pa = detect_circles(a, HcdParams{});
  const ParticleSet pb = detect_circles(b, HcdParams{});
  REQUIRE(pa.particles.size() == 1);
  REQUIRE(pb.particles.size() == 1);
  REQUIRE(std::abs((pb.particles[0].x_px - pa.particles[0].x_px) - 7.0) < 1e-9);
  REQUIRE(std::abs((pb.particles[0].y_px - pa.particles[0].y_px) - 5.0) < 1e-9);
  REQUIRE(pb.particles[0].radius_px == pa.particles[0].radius_px);
}

TEST_CASE("detection is deterministic including order", "[vision]") {
  const TestbedGeometry g;
  const RenderParams p;
  const TestbedState st = seed_beads(g, 120, 3);
  const Frame f = render(st, g, p, 17);
  const ParticleSet a = detect_circles(f, HcdParams{});
  const ParticleSet b = detect_circles(f, HcdParams{});
  REQUIRE(a.particles.size() == b.particles.size());
  for (std::size_t i = 0; i < a.particles.size(); ++i) {
    REQUIRE(a.particles[i].x_px == b.particles[i].x_px);
    REQUIRE(a.particles[i].y_px == b.particles[i].y_px);
    REQUIRE(a.particles[i].radius_px == b.particles[i].radius_px);
    REQUIRE(a.particles[i].vote_score == b.particles[i].vote_score);
  }
}

TEST_CASE("results are ordered by votes with coordinate tie-break", "[vision]") {
  Frame f(320, 160, 60);
  draw_disc(f, 60.0, 80.0, 6.0, 230, true);
  draw_disc(f, 160.0, 80.0, 6.0, 230, true);
  draw_disc(f, 260.0, 80.0, 6.0, 230, true);
  const ParticleSet ps = detect_circles(f, HcdParams{});
  REQUIRE(ps.particles.size() == 3);
  for (std::size_t i = 1; i < ps.particles.size(); ++i) {
    const Particle& prev = ps.particles[i - 1];
    const Particle& cur = ps.particles[i];
    const bool ordered = prev.vote_score > cur.vote_score ||
                         (prev.vote_score == cur.vote_score &&
                          (prev.x_px < cur.x_px ||
                           (prev.x_px == cur.x_px && prev.y_px <= cur.y_px)));
    REQUIRE(ordered);
  }
}

TEST_CASE("raising the vote threshold never adds detections", "[vision]") {
  const TestbedGeometry g;
  const RenderParams p;
  const TestbedState st = seed_beads(g, 150, 5);
  const Frame f = render(st, g, p, 23);
  HcdParams hp;
  std::size_t prev = SIZE_MAX;
  for (double votes : {8.0, 12.0, 18.0, 24.0, 32.0}) {
    hp.param_2 = votes;
    const std::size_t n = detect_circles(f, hp).particles.size();
    REQUIRE(n <= prev);
    prev = n;
  }
}

TEST_CASE("close centers deduplicate to the strongest", "[vision]") {
  Frame f(200, 160, 60);
  draw_disc(f, 90.0, 80.0, 6.0, 230, true);
  draw_disc(f, 110.0, 80.0, 6.0, 230, true);
  HcdParams hp;
  hp.min_center_distance = 6.0;
  REQUIRE(detect_circles(f, hp).particles.size() == 2);
  hp.min_center_distance = 50.0;
  REQUIRE(detect_circles(f, hp).particles.size() == 1);
}

TEST_CASE("observation window finds the inner electrode edges", "[vision]") {
  Frame f(340, 100, 60);
  for (int x = 40; x < 100; ++x)
    for (int y = 0; y < 100; ++y) f.at(x, y) = 140;
  for (int x = 240; x < 300; ++x)
    for (int y = 0; y < 100; ++y) f.at(x, y) = 140;
  const ObservationWindow w = detect_observation_window(f);
  REQUIRE(std::abs(w.left_edge_x - 100.0) <= 2.0);
  REQUIRE(std::abs(w.right_edge_x - 240.0) <= 2.0);
  REQUIRE(std::abs(w.reference_x - 170.0) <= 2.0);
  REQUIRE(w.reference_x == 0.5 * (w.left_edge_x + w.right_edge_x));
  // The fixture is symmetric, so the reference sits on the raster midline.
  REQUIRE(std::abs(w.reference_x - f.width / 2.0) <= 2.0);
}

TEST_CASE("observation window on a rendered chamber matches the layout", "[vision]") {
  const TestbedGeometry g;
  RenderParams p;
  p.noise_sigma = 0.0;
  const Frame f = render(TestbedState{}, g, p, 1);
  const ObservationWindow w = detect_observation_window(f);
  const GapSpan gap = central_gap(g);
  REQUIRE(std::abs(w.left_edge_x - gap.lo / g.pixel_scale_um) <= 2.0);
  REQUIRE(std::abs(w.right_edge_x - gap.hi / g.pixel_scale_um) <= 2.0);
}

TEST_CASE("blank frames cannot host an observation window", "[vision]") {
  const Frame f(320, 240, 60);
  REQUIRE_THROWS_AS(detect_observation_window(f), WindowDetectionError);
}

TEST_CASE("window filtering keeps inside particles in order", "[vision]") {
  ParticleSet ps;
  ps.frame_index = 9;
  ps.particles = {{90.0, 10.0, 6.0, 30}, {150.0, 12.0, 6.0, 25}, {300.0, 14.0, 6.0, 20}};
  const ObservationWindow w{100.0, 240.0, 170.0};

  const ParticleSet kept = filter_to_window(ps, w);
  REQUIRE(kept.frame_index == 9);
  REQUIRE(kept.particles.size() == 1);
  REQUIRE(kept.particles[0].x_px == 150.0);

  ParticleSet bounds;
  bounds.particles = {{100.0, 1.0, 6.0, 5}, {240.0, 1.0, 6.0, 4}, {99.9, 1.0, 6.0, 3}};
  REQUIRE(filter_to_window(bounds, w).particles.size() == 2);  // edges are inclusive

  ParticleSet outside;
  outside.particles = {{10.0, 1.0, 6.0, 5}, {310.0, 1.0, 6.0, 4}};
  REQUIRE(filter_to_window(outside, w).particles.empty());

  const ParticleSet all_in = filter_to_window(kept, w);
  REQUIRE(all_in.particles.size() == kept.particles.size());
}

TEST_CASE("detector parameter validation", "[vision]") {
  HcdParams p;
  p.min_radius = 0;
  REQUIRE_THROWS_AS(validate_hcd(p), std::invalid_argument);
  p = HcdParams{};
  p.min_radius = 10;
  p.max_radius = 9;
  REQUIRE_THROWS_AS(validate_hcd(p), std::invalid_argument);
  p = HcdParams{};
  p.param_2 = 0.0;
  REQUIRE_THROWS_AS(validate_hcd(p), std::invalid_argument);
}
