// Smallest useful closed loop: two frequency steps on a shrunken chamber,
// printing the label the trend analysis settles on for each.

#include <iostream>

#include "depscope/depscope.hpp"

int main() {
  using namespace depscope;

  RunSetup setup;
  setup.geometry.fov_width_um = 160;
  setup.geometry.fov_height_um = 120;
  setup.geometry.finger_count = 2;
  setup.geometry.pattern_offset_um = -15;
  setup.bead_count = 120;
  setup.seed = 7;

  const std::vector<double> schedule = {10e3, 2e6};
  const ScheduleResult res = run_schedule(schedule, setup);

  for (const StepResult& s : res.steps) {
    std::cout << format_double(s.frequency_hz) << " Hz -> "
              << (s.label ? to_string(*s.label) : "UNDETERMINED");
    if (s.mean_b) std::cout << "  (mean slope " << format_double(*s.mean_b) << ")";
    if (s.response.system_frames)
      std::cout << "  settled after " << *s.response.system_frames << " frames";
    std::cout << '\n';
  }
  if (const auto attract = res.band_map.attract_range())
    std::cout << "attracting band seen around " << format_double(attract->first) << " Hz\n";
  if (const auto repel = res.band_map.repel_range())
    std::cout << "repelling band seen around " << format_double(repel->first) << " Hz\n";
  return 0;
}
