#include "rcids/can/codec.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"

namespace rcids {

namespace {

uint64_t payload_view(const CanFrame& f, ByteOrder order) {
  uint64_t v = 0;
  if (order == ByteOrder::little) {
    for (int i = 7; i >= 0; --i) v = (v << 8) | f.data[static_cast<size_t>(i)];
  } else {
    for (int i = 0; i < 8; ++i) v = (v << 8) | f.data[static_cast<size_t>(i)];
  }
  return v;
}

void payload_store(CanFrame& f, ByteOrder order, uint64_t v) {
  if (order == ByteOrder::little) {
    for (size_t i = 0; i < 8; ++i) f.data[i] = static_cast<uint8_t>(v >> (8 * i));
  } else {
    for (size_t i = 0; i < 8; ++i) f.data[i] = static_cast<uint8_t>(v >> (8 * (7 - i)));
  }
}

uint64_t width_mask(uint32_t bits) {
  return bits >= 64 ? ~0ull : ((1ull << bits) - 1);
}

// The dlc bytes cover the low 8*dlc bits of the little-endian view but the
// HIGH 8*dlc bits of the big-endian view; a signal must sit inside the
// covered span or the frame is too short for it.
void check_window_in_payload(const CanFrame& f, const SignalSpec& spec) {
  if (f.dlc > 8) fail(ErrorCode::BadDlc, "dlc > 8");
  bool covered;
  if (spec.byte_order == ByteOrder::little) {
    covered = spec.start_bit + spec.bit_length <= 8u * f.dlc;
  } else {
    covered = spec.start_bit >= 64u - 8u * f.dlc;
  }
  if (!covered)
    fail(ErrorCode::TruncatedFrame,
         "signal window [" + std::to_string(spec.start_bit) + ", " +
             std::to_string(spec.start_bit + spec.bit_length) + ") not covered by dlc " +
             std::to_string(f.dlc));
}

}  // namespace

void validate_signal(const SignalSpec& spec) {
  if (spec.bit_length == 0 || spec.bit_length > 64)
    fail(ErrorCode::ConfigError, "signal bit_length must be 1..64");
  if (spec.start_bit >= 64 || spec.start_bit + spec.bit_length > 64)
    fail(ErrorCode::ConfigError, "signal window exceeds the 64-bit payload");
  if (spec.scale == 0.0 || !std::isfinite(spec.scale) || !std::isfinite(spec.offset))
    fail(ErrorCode::ConfigError, "signal scale/offset must be finite, scale nonzero");
}

void signal_physical_range(const SignalSpec& spec, double& lo, double& hi) {
  validate_signal(spec);
  int64_t raw_hi = spec.bit_length == 64 ? INT64_MAX
                                         : static_cast<int64_t>(width_mask(spec.bit_length) >> 1);
  int64_t raw_lo = spec.bit_length == 64 ? INT64_MIN : -raw_hi - 1;
  double a = static_cast<double>(raw_lo) * spec.scale + spec.offset;
  double b = static_cast<double>(raw_hi) * spec.scale + spec.offset;
  lo = std::min(a, b);
  hi = std::max(a, b);
}

int64_t raw_from_physical(const SignalSpec& spec, double value) {
  validate_signal(spec);
  if (!std::isfinite(value)) fail(ErrorCode::OutOfRange, "non-finite physical value");
  double scaled = (value - spec.offset) / spec.scale;
  if (std::abs(scaled) >= 9.3e18)  // would overflow the 64-bit raw integer
    fail(ErrorCode::OutOfRange, "value " + format_double(value) + " out of range");
  // Ties away from zero, the convention instrument vendors use for scaled
  // integers; llround implements exactly that.
  int64_t raw = std::llround(scaled);
  int64_t lo, hi;
  if (spec.bit_length == 64) {
    lo = INT64_MIN;
    hi = INT64_MAX;
  } else {
    hi = static_cast<int64_t>(width_mask(spec.bit_length) >> 1);
    lo = -hi - 1;
  }
  if (raw < lo || raw > hi)
    fail(ErrorCode::OutOfRange, "value " + format_double(value) + " needs raw " +
                                    std::to_string(raw) + ", outside [" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + "]");
  return raw;
}

void pack_signal(CanFrame& frame, const SignalSpec& spec, double value) {
  int64_t raw = raw_from_physical(spec, value);
  check_window_in_payload(frame, spec);
  uint64_t mask = width_mask(spec.bit_length);
  uint64_t field = (static_cast<uint64_t>(raw) & mask) << spec.start_bit;
  uint64_t keep = ~(mask << spec.start_bit);
  payload_store(frame, spec.byte_order,
                (payload_view(frame, spec.byte_order) & keep) | field);
}

double unpack_signal(const CanFrame& frame, const SignalSpec& spec) {
  validate_signal(spec);
  check_window_in_payload(frame, spec);
  uint64_t field =
      (payload_view(frame, spec.byte_order) >> spec.start_bit) & width_mask(spec.bit_length);
  int64_t raw;
  if (spec.bit_length < 64 && (field >> (spec.bit_length - 1)) & 1) {
    raw = static_cast<int64_t>(field | ~width_mask(spec.bit_length));  // sign extend
  } else {
    raw = static_cast<int64_t>(field);
  }
  return static_cast<double>(raw) * spec.scale + spec.offset;
}

std::string serialize_log_line(const CanFrame& frame) {
  if (frame.dlc > 8) fail(ErrorCode::BadDlc, "dlc > 8");
  if (frame.id > 0x7ff) fail(ErrorCode::MalformedLine, "id exceeds 11 bits");
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%010llu.%06llu) can0 %03x#",
                static_cast<unsigned long long>(frame.timestamp_us / 1000000),
                static_cast<unsigned long long>(frame.timestamp_us % 1000000), frame.id);
  std::string out(buf);
  for (uint8_t i = 0; i < frame.dlc; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", frame.data[i]);
    out += buf;
  }
  return out;
}

namespace {

// Column positions are 1-based so they match what editors display.
[[noreturn]] void bad_line(const std::string& line, size_t col, const std::string& why) {
  fail(ErrorCode::MalformedLine,
       why + " at column " + std::to_string(col + 1) + " in \"" + line + "\"");
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

CanFrame parse_log_line(const std::string& line) {
  size_t i = 0;
  auto need = [&](char c, const char* what) {
    if (i >= line.size() || line[i] != c) bad_line(line, i, std::string("expected ") + what);
    ++i;
  };

  CanFrame f;
  need('(', "'('");

  size_t sec_begin = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  size_t sec_len = i - sec_begin;
  if (sec_len == 0 || sec_len > 10) bad_line(line, sec_begin, "bad seconds field");
  uint64_t seconds = 0;
  for (size_t k = sec_begin; k < sec_begin + sec_len; ++k)
    seconds = seconds * 10 + static_cast<uint64_t>(line[k] - '0');

  need('.', "'.'");
  size_t us_begin = i;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  size_t us_len = i - us_begin;
  if (us_len == 0 || us_len > 6) bad_line(line, us_begin, "bad microseconds field");
  uint64_t micros = 0;
  for (size_t k = us_begin; k < us_begin + us_len; ++k)
    micros = micros * 10 + static_cast<uint64_t>(line[k] - '0');
  for (size_t k = us_len; k < 6; ++k) micros *= 10;  // short field means fraction digits
  f.timestamp_us = seconds * 1000000ull + micros;

  need(')', "')'");
  need(' ', "space");

  size_t ifc_begin = i;
  while (i < line.size() && line[i] != ' ') ++i;
  if (i == ifc_begin) bad_line(line, i, "missing bus token");
  need(' ', "space");

  uint32_t id = 0;
  size_t id_begin = i;
  while (i < line.size() && line[i] != '#') {
    int h = hex_value(line[i]);
    if (h < 0) bad_line(line, i, "bad id digit");
    if (i - id_begin >= 8) bad_line(line, i, "id field too long");
    id = (id << 4) | static_cast<uint32_t>(h);
    ++i;
  }
  if (i == id_begin) bad_line(line, i, "missing id");
  if (id > 0x7ff) bad_line(line, id_begin, "id exceeds 11 bits");
  f.id = id;
  need('#', "'#'");

  size_t data_len = line.size() - i;
  if (data_len % 2 != 0) bad_line(line, line.size(), "odd data nibble count");
  if (data_len / 2 > 8)
    fail(ErrorCode::BadDlc, "payload of " + std::to_string(data_len / 2) +
                                " bytes exceeds 8 in \"" + line + "\"");
  f.dlc = static_cast<uint8_t>(data_len / 2);
  for (size_t b = 0; b < f.dlc; ++b) {
    int hi = hex_value(line[i + 2 * b]);
    int lo = hex_value(line[i + 2 * b + 1]);
    if (hi < 0 || lo < 0) bad_line(line, i + 2 * b, "bad data digit");
    f.data[b] = static_cast<uint8_t>((hi << 4) | lo);
  }
  return f;
}

std::vector<CanFrame> parse_frame_log(const std::string& text) {
  std::vector<CanFrame> frames;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      frames.push_back(parse_log_line(line));
    } catch (const Error& e) {
      fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return frames;
}

std::string serialize_frame_log(const std::vector<CanFrame>& frames) {
  std::string out;
  for (const CanFrame& f : frames) {
    out += serialize_log_line(f);
    out.push_back('\n');
  }
  return out;
}

std::vector<CanFrame> read_frame_log(const std::string& path) {
  return parse_frame_log(read_file(path));
}

void write_frame_log(const std::string& path, const std::vector<CanFrame>& frames) {
  write_file(path, serialize_frame_log(frames));
}

SignalSpec steering_signal_spec() {
  SignalSpec s;
  s.start_bit = 0;
  s.bit_length = 16;
  s.byte_order = ByteOrder::little;
  s.scale = 0.001;
  s.offset = -2.048;
  s.unit = "radian";
  return s;
}

}  // namespace rcids
