#pragma once

#include <filesystem>
#include <string>

#include "depscope/depscope.hpp"

namespace testutil {

// Flat frame with one bright anti-aliased disc, like a clean microscope view.
inline depscope::Frame disk_fixture(int w, int h, double cx, double cy, double radius,
                                    std::uint8_t bg = 60, int level = 230) {
  depscope::Frame f(w, h, bg);
  depscope::draw_disc(f, cx, cy, radius, level, true);
  return f;
}

// Fresh per-test scratch directory under the system temp root.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("depscope-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small chamber + few beads: same physics, ~6x fewer pixels than the default.
inline depscope::RunSetup small_setup(std::uint64_t seed = 5) {
  depscope::RunSetup s;
  s.geometry.fov_width_um = 160;
  s.geometry.fov_height_um = 120;
  s.geometry.finger_count = 2;
  s.geometry.pattern_offset_um = -15;
  s.bead_count = 120;
  s.seed = seed;
  return s;
}

inline depscope::RunConfig small_config(std::uint64_t seed = 5) {
  depscope::RunConfig c;
  c.geometry.fov_width_um = 160;
  c.geometry.fov_height_um = 120;
  c.geometry.finger_count = 2;
  c.geometry.pattern_offset_um = -15;
  c.bead_count = 120;
  c.seed = seed;
  return c;
}

}  // namespace testutil
