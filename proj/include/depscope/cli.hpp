#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "depscope/config.hpp"

namespace depscope {

inline constexpr const char* kAnalysisLogHeader =
    "frame_index,x_raw,x_smoothed,is_imputed,b,label\n";
inline constexpr const char* kRunLogHeader =
    "frame_index,x_raw,x_smoothed,is_imputed,b,label,mode,current_frequency_hz,command_issued\n";

namespace detail {

inline std::string opt_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

inline std::string opt_label(const std::optional<Label>& l) {
  return l ? std::string(to_string(*l)) : std::string();
}

inline void append_analysis_row(std::string& out, const LogRecord& r) {
  out += format_int(r.frame_index);
  out += ',';
  out += opt_double(r.x_raw);
  out += ',';
  out += opt_double(r.x_smoothed);
  out += ',';
  out += r.is_imputed ? '1' : '0';
  out += ',';
  out += opt_double(r.b);
  out += ',';
  out += opt_label(r.label);
}

}  // namespace detail

// Per-sample feature/trend columns; empty cells where a quantity is not yet
// defined (warm-up) or no sample survived detection.
inline std::string analysis_log_csv(const std::vector<LogRecord>& log) {
  std::string out = kAnalysisLogHeader;
  for (const LogRecord& r : log) {
    detail::append_analysis_row(out, r);
    out += '\n';
  }
  return out;
}

// Analysis columns plus controller context.
inline std::string run_log_csv(const std::vector<LogRecord>& log) {
  std::string out = kRunLogHeader;
  for (const LogRecord& r : log) {
    detail::append_analysis_row(out, r);
    out += ',';
    out += to_string(r.mode);
    out += ',';
    out += format_double(r.current_frequency_hz);
    out += ',';
    out += r.command_issued ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline std::string frame_filename(std::int64_t index) {
  std::string digits = format_int(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "frame_" + digits + ".pgm";
}

namespace detail {

struct SummaryWriter {
  std::string text;
  void kv(const std::string& key, const std::string& value) {
    text += key;
    text += " = ";
    text += value.empty() ? "none" : value;
    text += '\n';
  }
  void kv(const std::string& key, double value) { kv(key, format_double(value)); }
  void kv(const std::string& key, std::int64_t value) { kv(key, format_int(value)); }
  void range(const std::string& key, const std::optional<std::pair<double, double>>& r) {
    kv(key, r ? format_double(r->first) + ".." + format_double(r->second) : std::string());
  }
};

inline std::string opt_count(const std::optional<std::int64_t>& v) {
  return v ? format_int(*v) : std::string();
}

}  // namespace detail

inline std::string schedule_summary(const RunConfig& cfg, const ScheduleResult& res,
                                    const std::vector<Label>& expected, bool ok) {
  detail::SummaryWriter w;
  w.kv("status", ok ? "ok" : "label_mismatch");
  w.kv("seed", format_int(static_cast<long long>(cfg.seed)));
  w.kv("frames_per_step", static_cast<std::int64_t>(cfg.frames_per_step));
  w.kv("cycles_completed", static_cast<std::int64_t>(res.cycles_completed));
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    const StepResult& s = res.steps[i];
    const std::string p = "step_" + format_int(static_cast<long long>(i)) + "_";
    w.kv(p + "frequency_hz", s.frequency_hz);
    w.kv(p + "label", detail::opt_label(s.label));
    w.kv(p + "expected_label", i < expected.size() ? to_string(expected[i]) : "");
    w.kv(p + "mean_b", detail::opt_double(s.mean_b));
    w.kv(p + "particle_response_frames", detail::opt_count(s.response.particle_frames));
    w.kv(p + "system_response_frames", detail::opt_count(s.response.system_frames));
  }
  w.range("attract_range_hz", res.band_map.attract_range());
  w.range("neutral_range_hz", res.band_map.neutral_range());
  w.range("repel_range_hz", res.band_map.repel_range());
  return w.text;
}

inline std::string crossover_summary(const RunConfig& cfg, const CrossoverResult& res) {
  detail::SummaryWriter w;
  w.kv("status", "ok");
  w.kv("seed", format_int(static_cast<long long>(cfg.seed)));
  w.kv("bracket_low_hz", cfg.f_low_hz);
  w.kv("bracket_high_hz", cfg.f_high_hz);
  w.kv("tolerance_ratio", cfg.tolerance_ratio);
  w.kv("crossover_estimate_hz", res.estimate_hz);
  w.kv("probes", static_cast<std::int64_t>(res.probes));
  for (std::size_t i = 0; i < res.trace.size(); ++i) {
    const ProbeRecord& p = res.trace[i];
    const std::string prefix = "probe_" + format_int(static_cast<long long>(i)) + "_";
    w.kv(prefix + "frequency_hz", p.frequency_hz);
    w.kv(prefix + "label", detail::opt_label(p.label));
    w.kv(prefix + "mean_b", detail::opt_double(p.mean_b));
  }
  return w.text;
}

// Full schedule run: analysis_log.csv + run_log.csv + summary.txt (+ frames/).
// Exit 0 only when every step's label matches the expected band.
inline int cmd_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  }
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "cannot create " << cfg.out_dir << ": " << ec.message() << '\n';
    return 3;
  }
  try {
    if (cfg.frames_per_step == 0) {
      write_file_text((dir / "analysis_log.csv").string(), kAnalysisLogHeader);
      write_file_text((dir / "run_log.csv").string(), kRunLogHeader);
      write_file_text((dir / "summary.txt").string(), "status = no_frames\n");
      out << "no frames requested; wrote empty logs to " << cfg.out_dir << '\n';
      return 0;
    }
    ExperimentRun::FrameSink sink;
    const fs::path frames_dir = dir / "frames";
    if (cfg.emit_frames) {
      fs::create_directories(frames_dir, ec);
      if (ec) {
        err << "cannot create " << frames_dir.string() << ": " << ec.message() << '\n';
        return 3;
      }
      sink = [frames_dir](const Frame& f) {
        write_pgm(f, (frames_dir / frame_filename(f.frame_index)).string());
      };
    }
    const ScheduleResult res = run_schedule(cfg.schedule, make_run_setup(cfg), sink);
    const SamplingConfig sampling = make_loop_config(cfg).sampling;
    std::vector<Label> expected;
    bool ok = true;
    for (std::size_t i = 0; i < res.steps.size(); ++i) {
      const std::optional<Label> want = expected_label(sampling, res.steps[i].frequency_hz);
      expected.push_back(want.value_or(Label::NO_DEP));
      ok = ok && res.steps[i].label && *res.steps[i].label == expected.back();
    }
    write_file_text((dir / "analysis_log.csv").string(), analysis_log_csv(res.log));
    write_file_text((dir / "run_log.csv").string(), run_log_csv(res.log));
    write_file_text((dir / "summary.txt").string(), schedule_summary(cfg, res, expected, ok));
    for (std::size_t i = 0; i < res.steps.size(); ++i)
      out << format_double(res.steps[i].frequency_hz) << " Hz -> "
          << detail::opt_label(res.steps[i].label) << " (expected " << to_string(expected[i])
          << ")\n";
    if (!ok) err << "label mismatch; see " << (dir / "summary.txt").string() << '\n';
    return ok ? 0 : 1;
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return 1;
  }
}

// Crossover hunt over the configured bracket; prints the probe trace and
// writes summary.txt.
inline int cmd_crossover(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  }
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "cannot create " << cfg.out_dir << ": " << ec.message() << '\n';
    return 3;
  }
  try {
    const CrossoverResult res =
        find_crossover(cfg.f_low_hz, cfg.f_high_hz, cfg.tolerance_ratio, make_run_setup(cfg));
    for (const ProbeRecord& p : res.trace)
      out << "probe " << format_double(p.frequency_hz) << " Hz -> " << detail::opt_label(p.label)
          << (p.mean_b ? " (b = " + format_double(*p.mean_b) + ")" : "") << '\n';
    out << "crossover estimate: " << format_double(res.estimate_hz) << " Hz after "
        << res.probes << " probes\n";
    write_file_text((dir / "summary.txt").string(), crossover_summary(cfg, res));
    return 0;
  } catch (const CrossoverPreconditionError& e) {
    err << "bracket rejected: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return 1;
  }
}

namespace detail {

// Trailing digit run of the stem ("frame_000123" -> 123); fallback handled by
// the caller when absent.
inline std::optional<std::int64_t> index_from_filename(const std::filesystem::path& p) {
  const std::string stem = p.stem().string();
  std::size_t end = stem.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(stem[end - 1]))) --end;
  if (end == stem.size()) return std::nullopt;
  std::string digits = stem.substr(end);
  if (digits.size() > 18) digits = digits.substr(digits.size() - 18);
  return static_cast<std::int64_t>(std::stoll(digits));
}

}  // namespace detail

// Batch detection over PGM files and/or directories of them. Bad files are
// reported and skipped; any skip turns the exit code into 3.
inline int cmd_detect(const RunConfig& cfg, const std::vector<std::string>& inputs,
                      std::ostream& out, std::ostream& err) {
  try {
    validate_hcd(cfg.detector);
  } catch (const std::exception& e) {
    err << "detector: " << e.what() << '\n';
    return 2;
  }
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  bool any_failed = false;
  for (const std::string& input : inputs) {
    std::error_code ec;
    if (fs::is_directory(input, ec)) {
      std::vector<fs::path> batch;
      for (const auto& entry : fs::directory_iterator(input, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
          batch.push_back(entry.path());
      std::sort(batch.begin(), batch.end());
      files.insert(files.end(), batch.begin(), batch.end());
    } else if (fs::exists(input, ec)) {
      files.push_back(input);
    } else {
      err << "no such input: " << input << '\n';
      any_failed = true;
    }
  }
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) {
    err << "cannot create " << cfg.out_dir << ": " << ec.message() << '\n';
    return 3;
  }
  std::ostringstream csv;
  write_detections_csv_header(csv);
  std::size_t processed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      Frame frame = read_pgm(files[i].string());
      frame.frame_index =
          detail::index_from_filename(files[i]).value_or(static_cast<std::int64_t>(i));
      ParticleSet ps = detect_circles(frame, cfg.detector);
      ps.frame_index = frame.frame_index;
      write_detections_csv(csv, ps);
      ++processed;
    } catch (const std::exception& e) {
      err << files[i].string() << ": " << e.what() << '\n';
      any_failed = true;
    }
  }
  const std::string csv_path = (fs::path(cfg.out_dir) / "detections.csv").string();
  try {
    write_file_text(csv_path, csv.str());
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return 3;
  }
  out << "processed " << processed << " of " << files.size() << " file(s) -> " << csv_path
      << '\n';
  return any_failed ? 3 : 0;
}

// Renders a fixed-frequency bead run to frames/ plus the ground-truth bead
// positions, giving cmd_detect something honest to chew on.
inline int cmd_render_corpus(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate_config(cfg);
  } catch (const ConfigError& e) {
    err << e.what() << '\n';
    return 2;
  }
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  const fs::path frames_dir = dir / "frames";
  std::error_code ec;
  fs::create_directories(frames_dir, ec);
  if (ec) {
    err << "cannot create " << frames_dir.string() << ": " << ec.message() << '\n';
    return 3;
  }
  try {
    const double freq = cfg.schedule.front();
    DriftModel drift = cfg.drift;
    drift.rng_seed = mix64(cfg.seed, 0x5712abcdULL);
    const std::uint64_t render_seed = mix64(cfg.seed, 0x9e11aa77ULL);
    TestbedState state =
        seed_beads(cfg.geometry, cfg.bead_count, mix64(cfg.seed, 0xbead0011ULL), freq);
    std::ostringstream states;
    write_state_csv_header(states);
    for (int i = 0; i < cfg.frames_per_step; ++i) {
      state.applied_freq_hz = freq;
      write_state_csv(states, state);
      const Frame frame = render(state, cfg.geometry, cfg.render, render_seed);
      write_pgm(frame, (frames_dir / frame_filename(frame.frame_index)).string());
      state = step(state, drift, cfg.geometry);
    }
    write_file_text((dir / "states.csv").string(), states.str());
    out << "wrote " << cfg.frames_per_step << " frame(s) at " << format_double(freq)
        << " Hz to " << frames_dir.string() << '\n';
    return 0;
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "render failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace depscope
