#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "depscope/depscope.hpp"

namespace {

using depscope::RunConfig;

// One option per config field, named exactly like the config-file key
// (section.name) so the two sources stay interchangeable. A handful of
// short aliases cover the common knobs.
void register_options(CLI::App& app, RunConfig& cfg, std::string& schedule_str) {
  const auto last = CLI::MultiOptionPolicy::TakeLast;
  app.add_option("--run.seed,--seed", cfg.seed, "master seed for all derived streams")
      ->multi_option_policy(last);
  app.add_option("--run.bead_count", cfg.bead_count, "beads placed in the chamber")
      ->multi_option_policy(last);
  app.add_option("--run.frames_per_step,--frames", cfg.frames_per_step,
                 "simulated frames per schedule step")
      ->multi_option_policy(last);
  app.add_option("--run.out_dir,--out-dir", cfg.out_dir, "artifact directory")
      ->multi_option_policy(last);
  app.add_flag("--run.emit_frames,--emit-frames", cfg.emit_frames,
               "write every rendered frame as PGM")
      ->multi_option_policy(last);
  app.add_option("--run.schedule", schedule_str, "comma-separated frequencies in Hz")
      ->multi_option_policy(last);

  auto opt = [&app, last](const std::string& name, auto& field, const std::string& desc) {
    app.add_option("--" + name, field, desc)->multi_option_policy(last);
  };
  opt("geometry.fov_width_um", cfg.geometry.fov_width_um, "field of view width");
  opt("geometry.fov_height_um", cfg.geometry.fov_height_um, "field of view height");
  opt("geometry.pixel_scale_um", cfg.geometry.pixel_scale_um, "micrometers per pixel");
  opt("geometry.finger_count", cfg.geometry.finger_count, "electrode finger count");
  opt("geometry.finger_width_um", cfg.geometry.finger_width_um, "finger width");
  opt("geometry.finger_gap_um", cfg.geometry.finger_gap_um, "gap between fingers");
  opt("geometry.pattern_offset_um", cfg.geometry.pattern_offset_um,
      "x of the first finger's left edge");
  opt("geometry.wall_margin_um", cfg.geometry.wall_margin_um, "bead clearance from walls");
  opt("geometry.edge_standoff_um", cfg.geometry.edge_standoff_um,
      "closest bead approach to an electrode edge");

  opt("drift.crossover_freq_hz", cfg.drift.crossover_freq_hz, "sign-flip frequency");
  opt("drift.max_speed_um_per_frame", cfg.drift.max_speed_um_per_frame, "drift amplitude");
  opt("drift.diffusion_sigma_um", cfg.drift.diffusion_sigma_um, "Brownian noise sigma");
  opt("drift.polarity", cfg.drift.polarity, "+1 or -1, flips the drift direction");

  opt("render.bead_intensity", cfg.render.bead_intensity, "bright bead level");
  opt("render.background_intensity", cfg.render.background_intensity, "gap background level");
  opt("render.electrode_intensity", cfg.render.electrode_intensity, "electrode band level");
  opt("render.noise_sigma", cfg.render.noise_sigma, "per-pixel Gaussian noise sigma");
  opt("render.bead_render_radius_px", cfg.render.bead_render_radius_px,
      "apparent bead radius in pixels");
  opt("render.dim_fraction", cfg.render.dim_fraction, "fraction of beads rendered faint");
  opt("render.dim_gain", cfg.render.dim_gain, "additive brightness of faint beads");

  opt("detector.param_1", cfg.detector.param_1, "edge-map high threshold");
  opt("detector.param_2", cfg.detector.param_2, "minimum accumulator votes");
  opt("detector.min_radius", cfg.detector.min_radius, "smallest searched radius, px");
  opt("detector.max_radius", cfg.detector.max_radius, "largest searched radius, px");
  opt("detector.min_center_distance", cfg.detector.min_center_distance,
      "dedup spacing between centers, px");

  opt("analysis.k", cfg.analysis.k, "watch window capacity");
  opt("analysis.smoothing_length", cfg.analysis.smoothing_length, "uniform filter width, odd");
  opt("analysis.delta", cfg.analysis.delta, "slope dead-band");

  opt("controller.sampling_rate_m", cfg.sampling_rate_m, "analyze every m-th frame");
  opt("controller.settle_timeout", cfg.settle_timeout, "max sampled ticks in SETTLE");
  opt("controller.expected_crossover_hz", cfg.expected_crossover_hz,
      "band split for expected labels");

  opt("crossover.f_low_hz", cfg.f_low_hz, "bracket low end");
  opt("crossover.f_high_hz", cfg.f_high_hz, "bracket high end");
  opt("crossover.tolerance_ratio", cfg.tolerance_ratio, "stop when f_high/f_low <= ratio");
}

// --config is handled before CLI11 runs: the file expands to --section.key
// tokens placed ahead of the real argv, so explicit flags win.
std::optional<std::string> extract_config_path(std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw depscope::ConfigError("--config needs a file path");
      std::string path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      return path;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      std::string path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      return path;
    }
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop bead drift characterization testbed"};
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cfg;
  std::string schedule_str = "10000,20000,4000000,2000000";
  register_options(app, cfg, schedule_str);

  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "run the four-step frequency schedule and log the feature trend");
  CLI::App* crossover =
      app.add_subcommand("crossover", "bisect the bracket for the drift sign flip");
  CLI::App* detect = app.add_subcommand("detect", "batch circle detection over PGM files");
  std::vector<std::string> detect_inputs;
  detect->add_option("inputs", detect_inputs, "PGM files or directories of them");
  CLI::App* corpus = app.add_subcommand(
      "render-corpus", "render a fixed-frequency run as PGM frames with ground truth");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (const auto config_path = extract_config_path(args)) {
      std::vector<std::string> tokens = depscope::config_file_tokens(*config_path);
      args.insert(args.begin(), tokens.begin(), tokens.end());
    }
  } catch (const depscope::IoError& e) {
    std::cerr << e.what() << '\n';
    return 3;
  } catch (const depscope::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }

  try {
    cfg.schedule = depscope::parse_schedule(schedule_str);
  } catch (const std::exception& e) {
    std::cerr << "run.schedule: " << e.what() << '\n';
    return 2;
  }

  if (reproduce->parsed()) return depscope::cmd_reproduce(cfg, std::cout, std::cerr);
  if (crossover->parsed()) return depscope::cmd_crossover(cfg, std::cout, std::cerr);
  if (detect->parsed()) return depscope::cmd_detect(cfg, detect_inputs, std::cout, std::cerr);
  if (corpus->parsed()) return depscope::cmd_render_corpus(cfg, std::cout, std::cerr);
  return 2;  // unreachable: require_subcommand(1)
}
