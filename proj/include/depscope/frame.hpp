#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "depscope/io.hpp"

namespace depscope {

// 8-bit grayscale raster; row-major, top-left origin. frame_index and
// timestamp are run metadata and are not stored in image files, so equality
// is defined over geometry and pixel content only.
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
  std::int64_t frame_index = 0;
  std::int64_t timestamp_ticks = 0;

  Frame() = default;
  Frame(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("frame: dimensions must be positive");
  }

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
  }
};

struct PgmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Header is not a well-formed binary PGM preamble.
struct PgmMalformedHeader : PgmError {
  using PgmError::PgmError;
};
// Header parsed but fewer pixel bytes follow than width*height.
struct PgmTruncated : PgmError {
  using PgmError::PgmError;
};
// Well-formed, but a sample depth this reader does not handle.
struct PgmUnsupportedMaxval : PgmError {
  using PgmError::PgmError;
};

// Canonical binary PGM: "P5\n<w> <h>\n255\n" followed by exactly w*h bytes.
inline std::vector<std::uint8_t> encode_pgm(const Frame& f) {
  std::string header = "P5\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), f.pixels.begin(), f.pixels.end());
  return out;
}

namespace detail {

inline bool pgm_ws(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Reads one decimal token, skipping whitespace and '#' comment lines.
inline long pgm_token(const std::vector<std::uint8_t>& data, std::size_t& pos) {
  for (;;) {
    while (pos < data.size() && pgm_ws(data[pos])) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= data.size() || data[pos] < '0' || data[pos] > '9')
    throw PgmMalformedHeader("pgm: expected decimal value in header");
  long v = 0;
  while (pos < data.size() && data[pos] >= '0' && data[pos] <= '9') {
    v = v * 10 + (data[pos] - '0');
    if (v > 1000000000L) throw PgmMalformedHeader("pgm: header value out of range");
    ++pos;
  }
  return v;
}

}  // namespace detail

inline Frame decode_pgm(const std::vector<std::uint8_t>& data) {
  if (data.size() < 2 || data[0] != 'P' || data[1] != '5')
    throw PgmMalformedHeader("pgm: missing P5 magic");
  std::size_t pos = 2;
  const long w = detail::pgm_token(data, pos);
  const long h = detail::pgm_token(data, pos);
  const long maxval = detail::pgm_token(data, pos);
  if (w <= 0 || h <= 0) throw PgmMalformedHeader("pgm: non-positive dimensions");
  if (pos >= data.size() || !detail::pgm_ws(data[pos]))
    throw PgmMalformedHeader("pgm: header not terminated by whitespace");
  ++pos;  // single whitespace byte separates header from payload
  if (maxval < 1 || maxval > 65535) throw PgmMalformedHeader("pgm: invalid maxval");
  if (maxval != 255)
    throw PgmUnsupportedMaxval("pgm: only 8-bit maxval 255 is supported, got " +
                               std::to_string(maxval));
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (data.size() - pos < need)
    throw PgmTruncated("pgm: payload holds " + std::to_string(data.size() - pos) + " of " +
                       std::to_string(need) + " bytes");
  Frame f(static_cast<int>(w), static_cast<int>(h));
  std::copy(data.begin() + static_cast<std::ptrdiff_t>(pos),
            data.begin() + static_cast<std::ptrdiff_t>(pos + need), f.pixels.begin());
  return f;
}

inline void write_pgm(const Frame& f, const std::string& path) {
  const std::vector<std::uint8_t> bytes = encode_pgm(f);
  write_file_bytes(path, bytes.data(), bytes.size());
}

inline Frame read_pgm(const std::string& path) { return decode_pgm(read_file_bytes(path)); }

}  // namespace depscope
