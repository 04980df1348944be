#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depscope/control.hpp"

namespace depscope {

// A config problem that should stop the run before it starts; carries
// field-level messages.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Every tunable of the system, one field per config key. Keys use
// section.name form: [run] seed in the file, --run.seed on the command line.
struct RunConfig {
  // [run]
  std::uint64_t seed = 1;
  int bead_count = 300;
  int frames_per_step = 100;
  std::string out_dir = "out";
  bool emit_frames = false;
  std::vector<double> schedule = {10e3, 20e3, 4e6, 2e6};

  TestbedGeometry geometry;  // [geometry]
  DriftModel drift;          // [drift]; rng stream is derived from run.seed
  RenderParams render;       // [render]
  HcdParams detector;        // [detector]
  AnalysisConfig analysis;   // [analysis]

  // [controller]
  int sampling_rate_m = 1;
  int settle_timeout = 90;
  double expected_crossover_hz = 500e3;  // seeds the expected-label bands

  // [crossover]
  double f_low_hz = 20e3;
  double f_high_hz = 2e6;
  double tolerance_ratio = 1.2;
};

inline LoopConfig make_loop_config(const RunConfig& c) {
  LoopConfig loop;
  loop.detector = c.detector;
  loop.analysis = c.analysis;
  loop.sampling.sampling_rate_m = c.sampling_rate_m;
  loop.sampling.settle_timeout = c.settle_timeout;
  loop.sampling.expected_bands = make_default_bands(c.expected_crossover_hz);
  return loop;
}

inline RunSetup make_run_setup(const RunConfig& c) {
  RunSetup s;
  s.geometry = c.geometry;
  s.drift = c.drift;
  s.render = c.render;
  s.loop = make_loop_config(c);
  s.bead_count = c.bead_count;
  s.frames_per_step = c.frames_per_step;
  s.seed = c.seed;
  return s;
}

// Cross-field validation with one message per offending field.
inline void validate_config(const RunConfig& c) {
  std::vector<std::string> problems;
  auto probe = [&problems](const char* field, auto&& fn) {
    try {
      fn();
      return true;
    } catch (const std::exception& e) {
      const std::string what = e.what();
      const std::string prefix = std::string(field) + ":";
      problems.push_back(what.rfind(prefix, 0) == 0 ? what : prefix + " " + what);
      return false;
    }
  };
  probe("geometry", [&] { validate_geometry(c.geometry); });
  probe("drift", [&] { validate_drift(c.drift); });
  probe("render", [&] { validate_render(c.render); });
  const bool detector_ok = probe("detector", [&] { validate_hcd(c.detector); });
  const bool analysis_ok = probe("analysis", [&] { validate_analysis(c.analysis); });
  if (detector_ok && analysis_ok)
    probe("controller", [&] { validate_loop(make_loop_config(c)); });
  if (c.bead_count < 0) problems.push_back("run.bead_count: must be non-negative");
  if (c.frames_per_step < 0) problems.push_back("run.frames_per_step: must be non-negative");
  if (c.schedule.empty()) problems.push_back("run.schedule: must list at least one frequency");
  for (double f : c.schedule)
    if (!(f >= kMinFrequencyHz && f <= kMaxFrequencyHz)) {
      problems.push_back("run.schedule: frequencies must lie in [1 Hz, 100 MHz]");
      break;
    }
  if (!(c.expected_crossover_hz > 0))
    problems.push_back("controller.expected_crossover_hz: must be positive");
  if (!(c.f_low_hz > 0 && c.f_low_hz < c.f_high_hz))
    problems.push_back("crossover: need 0 < f_low_hz < f_high_hz");
  if (!(c.tolerance_ratio > 1.0)) problems.push_back("crossover.tolerance_ratio: must exceed 1");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
// comments. Returns section-qualified keys in file order.
struct IniEntry {
  std::string key;  // "section.name", or bare "name" before any header
  std::string value;
  int line = 0;
};

inline std::vector<IniEntry> parse_ini(const std::string& text) {
  std::vector<IniEntry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    const char* ws = " \t\r";
    const auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
  };
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string raw = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::size_t comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    entries.push_back({section.empty() ? key : section + "." + key, value, line_no});
  }
  return entries;
}

// Turns a config file into command-line tokens (--section.key=value) so the
// same option table serves both sources; callers place these before the real
// argv tokens, letting explicit flags override the file.
inline std::vector<std::string> config_file_tokens(const std::string& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  const std::string text(bytes.begin(), bytes.end());
  std::vector<std::string> tokens;
  for (const IniEntry& e : parse_ini(text)) tokens.push_back("--" + e.key + "=" + e.value);
  return tokens;
}

// Comma-separated frequency list, e.g. "10000,20000,4000000,2000000".
inline std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string item = text.substr(pos, comma - pos);
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a == std::string::npos) throw ConfigError("schedule: empty entry");
    out.push_back(parse_double(item.substr(a, b - a + 1)));
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  return out;
}

}  // namespace depscope
