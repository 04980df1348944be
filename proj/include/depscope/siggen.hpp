#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace depscope {

enum class CommandKind { SET_FREQUENCY, SET_VOLTAGE, OUTPUT_ON, OUTPUT_OFF, QUERY_STATE };

struct SignalCommand {
  CommandKind kind = CommandKind::QUERY_STATE;
  double frequency_hz = 0.0;  // SET_FREQUENCY only
  double voltage_v = 0.0;     // SET_VOLTAGE only

  static SignalCommand set_frequency(double hz) {
    return {CommandKind::SET_FREQUENCY, hz, 0.0};
  }
  static SignalCommand set_voltage(double v) { return {CommandKind::SET_VOLTAGE, 0.0, v}; }
  static SignalCommand output_on() { return {CommandKind::OUTPUT_ON, 0.0, 0.0}; }
  static SignalCommand output_off() { return {CommandKind::OUTPUT_OFF, 0.0, 0.0}; }
  static SignalCommand query_state() { return {CommandKind::QUERY_STATE, 0.0, 0.0}; }

  friend bool operator==(const SignalCommand&, const SignalCommand&) = default;
};

inline constexpr double kMinFrequencyHz = 1.0;
inline constexpr double kMaxFrequencyHz = 100e6;
inline constexpr double kMaxVoltage = 20.0;

inline void validate_command(const SignalCommand& c) {
  if (c.kind == CommandKind::SET_FREQUENCY &&
      !(c.frequency_hz >= kMinFrequencyHz && c.frequency_hz <= kMaxFrequencyHz))
    throw std::invalid_argument("command: frequency out of [1 Hz, 100 MHz]");
  if (c.kind == CommandKind::SET_VOLTAGE &&
      !(c.voltage_v > 0.0 && c.voltage_v <= kMaxVoltage))
    throw std::invalid_argument("command: voltage out of (0, 20] V");
}

struct ScpiParseError : std::runtime_error {
  enum class Kind { UNKNOWN_KEYWORD, MISSING_ARGUMENT, EXTRA_ARGUMENT, NON_NUMERIC, OUT_OF_RANGE };
  Kind kind;
  std::size_t offset;  // byte position in the input line
  ScpiParseError(Kind k, std::size_t off, const std::string& msg)
      : std::runtime_error(msg + " (offset " + std::to_string(off) + ")"), kind(k), offset(off) {}
};

namespace detail {

// Plain decimal, no exponent, no trailing zeros — keeps the wire form
// unambiguous and bit-exactly reproducible.
inline std::string scpi_number(double v) {
  char buf[1100];  // fixed notation of a subnormal double runs to ~1080 chars
  std::to_chars_result res{};
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    res = std::to_chars(buf, buf + sizeof(buf), static_cast<long long>(v));
  } else {
    res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed);
  }
  return std::string(buf, res.ptr);
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  return out;
}

}  // namespace detail

// One ASCII line per command, newline-terminated:
//   FREQ <hz>  |  VOLT <v>  |  OUTP ON  |  OUTP OFF  |  STAT?
inline std::string serialize(const SignalCommand& c) {
  validate_command(c);
  switch (c.kind) {
    case CommandKind::SET_FREQUENCY: return "FREQ " + detail::scpi_number(c.frequency_hz) + "\n";
    case CommandKind::SET_VOLTAGE: return "VOLT " + detail::scpi_number(c.voltage_v) + "\n";
    case CommandKind::OUTPUT_ON: return "OUTP ON\n";
    case CommandKind::OUTPUT_OFF: return "OUTP OFF\n";
    default: return "STAT?\n";
  }
}

// Inverse of serialize; keywords case-insensitive, whitespace-tolerant
// between tokens. Errors carry a kind and the byte offset of the offender.
inline SignalCommand parse(std::string_view line) {
  using Kind = ScpiParseError::Kind;
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);

  const auto is_ws = [](char c) { return c == ' ' || c == '\t'; };
  std::size_t pos = 0;
  while (pos < line.size() && is_ws(line[pos])) ++pos;
  std::size_t kw_start = pos;
  while (pos < line.size() && !is_ws(line[pos])) ++pos;
  if (kw_start == pos)
    throw ScpiParseError(Kind::UNKNOWN_KEYWORD, kw_start, "scpi: empty command");
  const std::string kw = detail::upper(line.substr(kw_start, pos - kw_start));

  const auto arg_start = [&]() {
    while (pos < line.size() && is_ws(line[pos])) ++pos;
    return pos;
  };
  const auto expect_end = [&](std::size_t from) {
    std::size_t u = from;
    while (u < line.size() && is_ws(line[u])) ++u;
    if (u < line.size())
      throw ScpiParseError(Kind::EXTRA_ARGUMENT, u, "scpi: unexpected trailing bytes");
  };

  if (kw == "STAT?") {
    expect_end(pos);
    return SignalCommand::query_state();
  }
  if (kw == "OUTP") {
    const std::size_t a = arg_start();
    if (a == line.size())
      throw ScpiParseError(Kind::MISSING_ARGUMENT, a, "scpi: OUTP needs ON or OFF");
    std::size_t e = a;
    while (e < line.size() && !is_ws(line[e])) ++e;
    const std::string arg = detail::upper(line.substr(a, e - a));
    expect_end(e);
    if (arg == "ON") return SignalCommand::output_on();
    if (arg == "OFF") return SignalCommand::output_off();
    throw ScpiParseError(Kind::UNKNOWN_KEYWORD, a, "scpi: OUTP argument must be ON or OFF");
  }
  if (kw == "FREQ" || kw == "VOLT") {
    const std::size_t a = arg_start();
    if (a == line.size())
      throw ScpiParseError(Kind::MISSING_ARGUMENT, a, "scpi: " + kw + " needs a value");
    double value = 0.0;
    const auto res = std::from_chars(line.data() + a, line.data() + line.size(), value);
    if (res.ec != std::errc() || res.ptr == line.data() + a)
      throw ScpiParseError(Kind::NON_NUMERIC, a, "scpi: " + kw + " argument is not a number");
    expect_end(static_cast<std::size_t>(res.ptr - line.data()));
    if (kw == "FREQ") {
      if (!(value >= kMinFrequencyHz && value <= kMaxFrequencyHz))
        throw ScpiParseError(Kind::OUT_OF_RANGE, a, "scpi: frequency out of [1 Hz, 100 MHz]");
      return SignalCommand::set_frequency(value);
    }
    if (!(value > 0.0 && value <= kMaxVoltage))
      throw ScpiParseError(Kind::OUT_OF_RANGE, a, "scpi: voltage out of (0, 20] V");
    return SignalCommand::set_voltage(value);
  }
  throw ScpiParseError(Kind::UNKNOWN_KEYWORD, kw_start, "scpi: unknown keyword '" + kw + "'");
}

// The simulated instrument. Power-on state matches a freshly reset unit.
struct GeneratorState {
  double frequency_hz = 1000.0;
  double voltage_v = 1.0;
  bool output_enabled = false;
};

struct ApplyResult {
  GeneratorState state;
  std::optional<std::string> reply;
};

inline ApplyResult apply(const GeneratorState& state, const SignalCommand& c) {
  validate_command(c);
  ApplyResult res{state, std::nullopt};
  switch (c.kind) {
    case CommandKind::SET_FREQUENCY: res.state.frequency_hz = c.frequency_hz; break;
    case CommandKind::SET_VOLTAGE: res.state.voltage_v = c.voltage_v; break;
    case CommandKind::OUTPUT_ON: res.state.output_enabled = true; break;
    case CommandKind::OUTPUT_OFF: res.state.output_enabled = false; break;
    case CommandKind::QUERY_STATE:
      res.reply = "FREQ " + detail::scpi_number(state.frequency_hz) + ";VOLT " +
                  detail::scpi_number(state.voltage_v) + ";OUTP " +
                  (state.output_enabled ? "ON" : "OFF") + "\n";
      break;
  }
  return res;
}

}  // namespace depscope
