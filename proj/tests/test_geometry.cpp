#include <catch2/catch_amalgamated.hpp>

#include "depscope/geometry.hpp"

using namespace depscope;

TEST_CASE("default geometry validates and rasterizes to 640x480", "[geometry]") {
  TestbedGeometry g;
  REQUIRE_NOTHROW(validate_geometry(g));
  REQUIRE(raster_width(g) == 640);
  REQUIRE(raster_height(g) == 480);
}

TEST_CASE("validate_geometry rejects broken layouts", "[geometry]") {
  TestbedGeometry g;
  g.finger_count = 1;
  REQUIRE_THROWS_AS(validate_geometry(g), std::invalid_argument);

  g = TestbedGeometry{};
  g.pixel_scale_um = 0.0;
  REQUIRE_THROWS_AS(validate_geometry(g), std::invalid_argument);

  g = TestbedGeometry{};  // gap straddles the right wall -> nothing to watch
  g.fov_width_um = 100;
  g.pattern_offset_um = 0;
  g.finger_width_um = 60;
  g.finger_gap_um = 60;
  REQUIRE_THROWS_AS(validate_geometry(g), std::invalid_argument);

  g = TestbedGeometry{};
  g.wall_margin_um = -1;
  REQUIRE_THROWS_AS(validate_geometry(g), std::invalid_argument);
}

TEST_CASE("layout partitions the default field of view", "[geometry]") {
  const ElectrodeLayout lay = make_layout(TestbedGeometry{});
  // Fingers at [55,125] and [195,265]; the third starts beyond the view.
  REQUIRE(lay.bounds == std::vector<double>{0, 55, 125, 195, 265, 320});
  REQUIRE(lay.finger_region == std::vector<bool>{false, true, false, true, false});
  REQUIRE(lay.edge_at == std::vector<bool>{false, true, true, true, true, false});
}

TEST_CASE("region lookup assigns electrode edges to the gap side", "[geometry]") {
  const ElectrodeLayout lay = make_layout(TestbedGeometry{});

  const RegionBounds finger = region_at(lay, 100.0);
  REQUIRE(finger.is_finger);
  REQUIRE(finger.lo == 55.0);
  REQUIRE(finger.hi == 125.0);

  const RegionBounds gap = region_at(lay, 160.0);
  REQUIRE_FALSE(gap.is_finger);
  REQUIRE(gap.lo == 125.0);
  REQUIRE(gap.hi == 195.0);
  REQUIRE(gap.lo_is_edge);
  REQUIRE(gap.hi_is_edge);

  // x exactly on a finger's left boundary belongs to the gap on its left.
  REQUIRE_FALSE(region_at(lay, 55.0).is_finger);
  REQUIRE(region_at(lay, 55.0).hi == 55.0);
  // ...and on a finger's right boundary, to the gap on its right.
  REQUIRE_FALSE(region_at(lay, 125.0).is_finger);
  REQUIRE(region_at(lay, 125.0).lo == 125.0);

  // Outer regions touch the walls, which are not electrode edges.
  REQUIRE_FALSE(region_at(lay, 10.0).lo_is_edge);
  REQUIRE(region_at(lay, 10.0).hi_is_edge);
}

TEST_CASE("central_gap picks the gap nearest the view center", "[geometry]") {
  const GapSpan gap = central_gap(TestbedGeometry{});
  REQUIRE(gap.lo == 125.0);
  REQUIRE(gap.hi == 195.0);
  REQUIRE(gap.center() == 160.0);
}

TEST_CASE("central_gap exists for the shrunken two-finger chamber", "[geometry]") {
  TestbedGeometry g;
  g.fov_width_um = 160;
  g.fov_height_um = 120;
  g.finger_count = 2;
  g.pattern_offset_um = -15;
  REQUIRE_NOTHROW(validate_geometry(g));
  const GapSpan gap = central_gap(g);
  REQUIRE(gap.lo == 55.0);
  REQUIRE(gap.hi == 125.0);
}
