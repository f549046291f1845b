#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace rcids {

// One classical CAN 2.0A frame. Extended (29-bit) ids are out of scope; the
// parser rejects them.
struct CanFrame {
  uint64_t timestamp_us = 0;      // microseconds since capture start
  uint32_t id = 0;                // 11-bit identifier, < 2048
  uint8_t dlc = 0;                // payload length, 0..8
  std::array<uint8_t, 8> data{};  // payload, bytes past dlc stay zero

  bool operator==(const CanFrame&) const = default;
};

enum class ByteOrder : uint8_t { little, big };

// DBC-style scalar signal. start_bit is the position of the signal's least
// significant bit inside the 64-bit view of the payload:
//   little: data[0] is the least significant byte of the view (Intel),
//   big:    data[0] is the most significant byte of the view (Motorola).
// Raw values are two's complement over bit_length bits (the stored field is
// just the low bit_length bits of that integer); physical = raw*scale+offset.
// The signed convention is what lets one signal carry values on both sides
// of its offset, which forged traffic exercises.
struct SignalSpec {
  uint32_t start_bit = 0;    // 0..63
  uint32_t bit_length = 16;  // 1..64
  ByteOrder byte_order = ByteOrder::little;
  double scale = 1.0;        // != 0
  double offset = 0.0;
  std::string unit = "";     // advisory, e.g. "radian"
};

// Throws CONFIG_ERROR when the layout cannot describe any signal at all
// (zero or oversized width, window past bit 63, zero scale).
void validate_signal(const SignalSpec& spec);

// Smallest and largest physical values the signal can carry.
void signal_physical_range(const SignalSpec& spec, double& lo, double& hi);

// Physical -> raw with ties rounded away from zero. Throws OUT_OF_RANGE when
// the rounded result does not fit the two's-complement width.
int64_t raw_from_physical(const SignalSpec& spec, double value);

// Writes the signal into the frame payload. The signal window must lie
// within the frame's dlc bytes (TRUNCATED_FRAME otherwise). Bits outside the
// window are left untouched.
void pack_signal(CanFrame& frame, const SignalSpec& spec, double value);

// Reads the signal back as a physical value (sign-extended raw*scale+offset).
// Throws TRUNCATED_FRAME when dlc does not cover the signal window.
double unpack_signal(const CanFrame& frame, const SignalSpec& spec);

// One frame per line, candump-compatible text format:
//   (0000000001.000000) can0 0c4#08f4
// Serialization is canonical: 10-digit zero-padded seconds, 6-digit
// microseconds, bus name "can0", 3-digit lowercase hex id, lowercase hex
// payload. The parser is more tolerant: any bus token, 1..10 second digits,
// 1..6 fractional digits, upper or lower case hex.
std::string serialize_log_line(const CanFrame& frame);
CanFrame parse_log_line(const std::string& line);  // MALFORMED_LINE / BAD_DLC

// Whole-log helpers. Frame order is preserved exactly in both directions;
// parse errors report the 1-based line number.
std::vector<CanFrame> parse_frame_log(const std::string& text);
std::string serialize_frame_log(const std::vector<CanFrame>& frames);
std::vector<CanFrame> read_frame_log(const std::string& path);
void write_frame_log(const std::string& path, const std::vector<CanFrame>& frames);

// The steering-angle signal every tool in this kit defaults to: 16 bits
// little-endian at bit 0, 1 mrad per count, offset -2.048 rad.
SignalSpec steering_signal_spec();

}  // namespace rcids
