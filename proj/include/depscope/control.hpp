#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "depscope/render.hpp"
#include "depscope/siggen.hpp"
#include "depscope/testbed.hpp"
#include "depscope/trend.hpp"
#include "depscope/vision.hpp"

namespace depscope {

enum class ControlMode { MONITOR, SETTLE };

inline const char* to_string(ControlMode m) {
  return m == ControlMode::SETTLE ? "SETTLE" : "MONITOR";
}

// Which label a frequency is expected to produce, used for settle-exit and
// response-time bookkeeping. Against the simulator this mirrors the drift
// law's sign; against real hardware it would come from a prior
// characterization pass.
struct BandExpectation {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  Label label = Label::NO_DEP;
};

inline std::vector<BandExpectation> make_default_bands(double crossover_hz) {
  return {{0.0, crossover_hz, Label::POSITIVE_DEP},
          {crossover_hz, 1e300, Label::NEGATIVE_DEP}};
}

struct SamplingConfig {
  int sampling_rate_m = 1;  // analyze every m-th frame
  int settle_timeout = 90;  // sampled ticks before SETTLE is abandoned
  std::vector<BandExpectation> expected_bands = make_default_bands(500e3);
};

// Expected label at frequency f; none on band boundaries or gaps.
inline std::optional<Label> expected_label(const SamplingConfig& cfg, double f_hz) {
  for (const BandExpectation& b : cfg.expected_bands)
    if (f_hz > b.lo_hz && f_hz < b.hi_hz) return b.label;
  return std::nullopt;
}

struct ControllerState {
  ControlMode mode = ControlMode::MONITOR;
  double current_frequency_hz = 0.0;
  double current_voltage_v = 1.0;
  std::int64_t settle_entered_at = -1;
  std::optional<SignalCommand> last_command;
  int cycles_completed = 0;
};

// One sampled tick of the loop. x/b/label fields are empty while the
// pipeline has not yet produced enough data. b_raw is the unsmoothed window
// slope; it drives particle-response timing and is not part of the
// analysis CSV.
struct LogRecord {
  std::int64_t frame_index = 0;
  std::optional<double> x_raw;
  std::optional<double> x_smoothed;
  bool is_imputed = false;
  std::optional<double> b;
  std::optional<Label> label;
  std::optional<double> b_raw;
  ControlMode mode = ControlMode::MONITOR;
  double current_frequency_hz = 0.0;
  bool command_issued = false;
};

struct LoopConfig {
  HcdParams detector;
  AnalysisConfig analysis;
  SamplingConfig sampling;
};

inline void validate_loop(const LoopConfig& cfg) {
  validate_hcd(cfg.detector);
  validate_analysis(cfg.analysis);
  if (cfg.sampling.sampling_rate_m < 1)
    throw std::invalid_argument("control: sampling rate m must be >= 1");
  if (cfg.sampling.settle_timeout <= cfg.analysis.k)
    throw std::invalid_argument("control: settle timeout must exceed window length k");
}

// The closed loop's analysing half: samples frames at rate m, maintains the
// watch window, fits the trend, and tracks MONITOR/SETTLE. The observation
// window is detected once, on the first sampled frame, then frozen.
class ControlLoop {
 public:
  explicit ControlLoop(const LoopConfig& cfg) : cfg_(cfg), watch_(cfg.analysis.k) {
    validate_loop(cfg);
  }

  // Feeds one frame; returns true when it was on the sampling grid and a log
  // record was appended. Pipeline failures count as missing ticks.
  bool observe(const Frame& frame) {
    if (frame.frame_index % cfg_.sampling.sampling_rate_m != 0) return false;

    LogRecord rec;
    rec.frame_index = frame.frame_index;
    rec.mode = state_.mode;
    rec.current_frequency_hz = state_.current_frequency_hz;
    rec.command_issued = pending_command_;
    pending_command_ = false;

    std::optional<FeatureSample> sample;
    try {
      if (!window_) window_ = detect_observation_window(frame);
      const ParticleSet ps = filter_to_window(detect_circles(frame, cfg_.detector), *window_);
      sample = extract_feature(ps, window_->reference_x);
    } catch (const std::exception&) {
      sample = std::nullopt;
    }
    if (!sample) sample = impute_missing(watch_, frame.frame_index);

    if (sample) {
      watch_.push(*sample);
      rec.x_raw = sample->value;
      rec.is_imputed = sample->is_imputed;
      const std::vector<double> vals = watch_.values();
      const int n = static_cast<int>(vals.size());
      rec.x_smoothed = n >= cfg_.analysis.smoothing_length
                           ? smooth(vals, cfg_.analysis.smoothing_length).back()
                           : sample->value;
      if (n >= 2) rec.b_raw = least_squares_slope(vals);
      if (n >= 2 && n >= cfg_.analysis.smoothing_length) {
        const TrendResult tr = fit_trend(watch_, cfg_.analysis);
        rec.b = tr.b;
        rec.label = tr.label;
      }
    }

    if (state_.mode == ControlMode::SETTLE) {
      ++settle_ticks_;
      bool regime_seen = false;
      if (rec.label) {
        const auto want = expected_label(cfg_.sampling, state_.current_frequency_hz);
        regime_seen = want && *rec.label == *want;
      }
      if (regime_seen || settle_ticks_ >= cfg_.sampling.settle_timeout) {
        state_.mode = ControlMode::MONITOR;
        settle_ticks_ = 0;
      }
    }

    log_.push_back(rec);
    return true;
  }

  bool can_command() const { return state_.mode == ControlMode::MONITOR; }

  // Bookkeeping for a command the runner transmitted; enters SETTLE.
  void command_issued(const SignalCommand& cmd, std::int64_t at_frame_index) {
    if (state_.mode != ControlMode::MONITOR)
      throw std::logic_error("control: command issued while settling");
    state_.last_command = cmd;
    if (cmd.kind == CommandKind::SET_FREQUENCY) state_.current_frequency_hz = cmd.frequency_hz;
    if (cmd.kind == CommandKind::SET_VOLTAGE) state_.current_voltage_v = cmd.voltage_v;
    state_.settle_entered_at = at_frame_index;
    state_.mode = ControlMode::SETTLE;
    state_.cycles_completed += 1;
    settle_ticks_ = 0;
    pending_command_ = true;
  }

  const LoopConfig& config() const { return cfg_; }
  const ControllerState& state() const { return state_; }
  const std::vector<LogRecord>& log() const { return log_; }
  const std::optional<ObservationWindow>& observation_window() const { return window_; }
  const WatchWindow& watch() const { return watch_; }

 private:
  LoopConfig cfg_;
  ControllerState state_;
  WatchWindow watch_;
  std::optional<ObservationWindow> window_;
  std::vector<LogRecord> log_;
  int settle_ticks_ = 0;
  bool pending_command_ = false;
};

struct ResponseTimes {
  std::optional<std::int64_t> particle_frames;  // command -> raw trend sign flip
  std::optional<std::int64_t> system_frames;    // command -> emitted matching label
};

// Scans the log records of one step for the post-command response. The
// particle response is the first tick whose unsmoothed slope already has the
// new regime's sign; the system response is the first tick at or after it
// whose emitted classification matches.
inline ResponseTimes measure_response(const std::vector<LogRecord>& log, std::size_t begin,
                                      std::size_t end, std::int64_t command_frame,
                                      std::optional<Label> expected) {
  ResponseTimes rt;
  if (!expected || *expected == Label::NO_DEP) return rt;
  const double want_sign = *expected == Label::POSITIVE_DEP ? 1.0 : -1.0;
  std::size_t particle_at = end;
  for (std::size_t i = begin; i < end; ++i) {
    if (log[i].b_raw && *log[i].b_raw * want_sign > 0.0) {
      rt.particle_frames = log[i].frame_index - command_frame;
      particle_at = i;
      break;
    }
  }
  for (std::size_t i = particle_at; i < end; ++i) {
    if (log[i].label && *log[i].label == *expected) {
      rt.system_frames = log[i].frame_index - command_frame;
      break;
    }
  }
  return rt;
}

// Outcome of one constant-frequency step. label is empty (UNDETERMINED) when
// no settled classification was produced.
struct StepResult {
  double frequency_hz = 0.0;
  std::optional<Label> label;
  std::optional<double> mean_b;
  ResponseTimes response;
  std::int64_t start_frame = 0;  // first simulated frame of the step
  std::int64_t end_frame = 0;    // one past the last
};

// Probed frequencies with their observed regimes, plus the derived
// attract/neutral/repel frequency ranges.
struct FrequencyBandMap {
  struct Entry {
    double frequency_hz = 0.0;
    std::optional<Label> label;
    std::optional<double> mean_b;
  };
  std::vector<Entry> entries;

  void add(double f_hz, std::optional<Label> label, std::optional<double> mean_b) {
    for (Entry& e : entries)
      if (e.frequency_hz == f_hz) {
        e.label = label;
        e.mean_b = mean_b;
        return;
      }
    entries.push_back({f_hz, label, mean_b});
  }

  std::optional<std::pair<double, double>> range_of(Label l) const {
    std::optional<std::pair<double, double>> r;
    for (const Entry& e : entries) {
      if (!e.label || *e.label != l) continue;
      if (!r)
        r = {e.frequency_hz, e.frequency_hz};
      else {
        r->first = std::min(r->first, e.frequency_hz);
        r->second = std::max(r->second, e.frequency_hz);
      }
    }
    return r;
  }
  std::optional<std::pair<double, double>> attract_range() const {
    return range_of(Label::POSITIVE_DEP);
  }
  std::optional<std::pair<double, double>> repel_range() const {
    return range_of(Label::NEGATIVE_DEP);
  }
  std::optional<std::pair<double, double>> neutral_range() const {
    return range_of(Label::NO_DEP);
  }
};

// Everything needed to assemble one simulated closed-loop run. seed derives
// the bead placement, the drift noise, and the render noise streams.
struct RunSetup {
  TestbedGeometry geometry;
  DriftModel drift;
  RenderParams render;
  LoopConfig loop;
  int bead_count = 300;
  int frames_per_step = 100;
  std::uint64_t seed = 1;
};

// Simulator + generator + control loop wired together; steps share one
// continuous bead history. Commands travel through the wire grammar
// (serialize -> parse -> apply) exactly as they would toward real hardware.
class ExperimentRun {
 public:
  using FrameSink = std::function<void(const Frame&)>;

  explicit ExperimentRun(const RunSetup& setup, FrameSink sink = nullptr)
      : setup_(setup), loop_(setup.loop), sink_(std::move(sink)) {
    validate_geometry(setup_.geometry);
    validate_render(setup_.render);
    if (setup_.bead_count < 0) throw std::invalid_argument("run: bead count must be >= 0");
    if (setup_.frames_per_step < 0) throw std::invalid_argument("run: frames per step must be >= 0");
    setup_.drift.rng_seed = mix64(setup_.seed, 0x5712abcdULL);
    validate_drift(setup_.drift);
    render_seed_ = mix64(setup_.seed, 0x9e11aa77ULL);
    state_ = seed_beads(setup_.geometry, setup_.bead_count, mix64(setup_.seed, 0xbead0011ULL),
                        gen_.frequency_hz);
  }

  StepResult run_step(double f_hz) {
    const SignalCommand cmd = SignalCommand::set_frequency(f_hz);
    const std::string wire = serialize(cmd);
    transcript_ += wire;
    const SignalCommand parsed = parse(wire);
    gen_ = apply(gen_, parsed).state;
    loop_.command_issued(parsed, state_.frame_index);

    const std::size_t log_begin = loop_.log().size();
    const std::int64_t command_frame = state_.frame_index;
    for (int t = 0; t < setup_.frames_per_step; ++t) {
      state_.applied_freq_hz = gen_.frequency_hz;
      state_ = step(state_, setup_.drift, setup_.geometry);
      const Frame fr = render(state_, setup_.geometry, setup_.render, render_seed_);
      loop_.observe(fr);
      if (sink_) sink_(fr);
    }

    StepResult sr;
    sr.frequency_hz = f_hz;
    sr.start_frame = command_frame + 1;
    sr.end_frame = state_.frame_index + 1;
    double sum = 0.0;
    int n = 0;
    const auto& log = loop_.log();
    for (std::size_t i = log_begin; i < log.size(); ++i) {
      if (log[i].mode == ControlMode::MONITOR && log[i].b) {
        sum += *log[i].b;
        ++n;
      }
    }
    if (n > 0) {
      sr.mean_b = sum / n;
      sr.label = classify(*sr.mean_b, setup_.loop.analysis.delta);
    }
    sr.response = measure_response(log, log_begin, log.size(), command_frame,
                                   expected_label(setup_.loop.sampling, f_hz));
    return sr;
  }

  const ControlLoop& loop() const { return loop_; }
  const TestbedState& testbed() const { return state_; }
  const GeneratorState& generator() const { return gen_; }
  const std::string& transcript() const { return transcript_; }

 private:
  RunSetup setup_;
  ControlLoop loop_;
  FrameSink sink_;
  TestbedState state_;
  GeneratorState gen_;
  std::uint64_t render_seed_ = 0;
  std::string transcript_;
};

struct ScheduleResult {
  std::vector<StepResult> steps;
  FrequencyBandMap band_map;
  std::vector<LogRecord> log;
  std::string command_transcript;
  int cycles_completed = 0;
};

// Applies each frequency in turn; every application is one cycle.
inline ScheduleResult run_schedule(const std::vector<double>& schedule, const RunSetup& setup,
                                   ExperimentRun::FrameSink sink = nullptr) {
  if (schedule.empty()) throw std::invalid_argument("run_schedule: empty schedule");
  ExperimentRun run(setup, std::move(sink));
  ScheduleResult out;
  for (double f : schedule) {
    const StepResult sr = run.run_step(f);
    out.band_map.add(f, sr.label, sr.mean_b);
    out.steps.push_back(sr);
  }
  out.log = run.loop().log();
  out.command_transcript = run.transcript();
  out.cycles_completed = run.loop().state().cycles_completed;
  return out;
}

struct CrossoverPreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProbeRecord {
  double frequency_hz = 0.0;
  std::optional<Label> label;
  std::optional<double> mean_b;
};

struct CrossoverResult {
  double estimate_hz = 0.0;
  int probes = 0;
  std::vector<ProbeRecord> trace;
};

// Log-frequency bisection for the drift sign flip. Every probe is a settled
// constant-frequency step on one continuous testbed. NO_DEP probes shrink
// toward the side the mean slope still points at; three NO_DEP probes in a
// row mean the probe sits inside the dead-band, which is the answer itself.
inline CrossoverResult find_crossover(double f_low, double f_high, double tolerance_ratio,
                                      const RunSetup& setup) {
  if (!(f_low > 0.0) || !(f_low < f_high))
    throw std::invalid_argument("crossover: need 0 < f_low < f_high");
  if (!(tolerance_ratio > 1.0))
    throw std::invalid_argument("crossover: tolerance ratio must exceed 1");

  ExperimentRun run(setup);
  CrossoverResult out;
  auto probe = [&](double f) {
    const StepResult sr = run.run_step(f);
    out.trace.push_back({f, sr.label, sr.mean_b});
    ++out.probes;
    return sr;
  };

  if (f_high / f_low <= tolerance_ratio) {
    const double fm = std::sqrt(f_low * f_high);
    probe(fm);
    out.estimate_hz = fm;
    return out;
  }

  const StepResult lo = probe(f_low);
  if (lo.label != Label::POSITIVE_DEP)
    throw CrossoverPreconditionError("crossover: lower bracket endpoint is not POSITIVE_DEP");
  const StepResult hi = probe(f_high);
  if (hi.label != Label::NEGATIVE_DEP)
    throw CrossoverPreconditionError("crossover: upper bracket endpoint is not NEGATIVE_DEP");

  int consecutive_nodep = 0;
  while (f_high / f_low > tolerance_ratio) {
    const double fm = std::sqrt(f_low * f_high);
    const StepResult pr = probe(fm);
    if (pr.label == Label::POSITIVE_DEP) {
      f_low = fm;
      consecutive_nodep = 0;
    } else if (pr.label == Label::NEGATIVE_DEP) {
      f_high = fm;
      consecutive_nodep = 0;
    } else {
      if (++consecutive_nodep >= 3) {
        out.estimate_hz = fm;
        return out;
      }
      if (pr.mean_b && *pr.mean_b > 0.0)
        f_low = fm;
      else
        f_high = fm;
    }
  }
  out.estimate_hz = std::sqrt(f_low * f_high);
  return out;
}

}  // namespace depscope
