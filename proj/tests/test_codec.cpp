#include <doctest.h>

#include <cmath>

#include "rcids/can/codec.hpp"
#include "rcids/error.hpp"
#include "rcids/rng.hpp"

using namespace rcids;

namespace {

// The default steering-angle signal used across the toolkit:
// 16-bit little-endian, 1 mrad per count, offset -2.048 rad.
SignalSpec steering_spec() {
  SignalSpec s;
  s.start_bit = 0;
  s.bit_length = 16;
  s.byte_order = ByteOrder::little;
  s.scale = 0.001;
  s.offset = -2.048;
  s.unit = "radian";
  return s;
}

CanFrame frame_with(const SignalSpec& spec, double value, uint8_t dlc = 8) {
  CanFrame f;
  f.dlc = dlc;
  pack_signal(f, spec, value);
  return f;
}

}  // namespace

TEST_CASE("raw encoding of boundary, zero and positive angles") {
  SignalSpec s = steering_spec();
  CHECK(raw_from_physical(s, -2.048) == 0);   // offset boundary
  CHECK(raw_from_physical(s, 0.0) == 2048);   // (0 - (-2.048)) / 0.001
  CHECK(raw_from_physical(s, 0.5) == 2548);   // same formula
}

TEST_CASE("unpack inverts the boundary and quantizes within half a count") {
  SignalSpec s = steering_spec();
  CanFrame f;
  f.dlc = 2;
  CHECK(unpack_signal(f, s) == -2.048);  // raw 0 reproduces the offset exactly

  pack_signal(f, s, 0.5);
  CHECK(std::abs(unpack_signal(f, s) - 0.5) <= 0.0005);
}

TEST_CASE("ties round away from zero") {
  SignalSpec s;
  s.bit_length = 8;
  s.scale = 1.0;
  s.offset = 0.0;
  CHECK(raw_from_physical(s, 0.5) == 1);
  CHECK(raw_from_physical(s, -0.5) == -1);
  CHECK(raw_from_physical(s, 2.5) == 3);
  CHECK(raw_from_physical(s, -2.5) == -3);
  CHECK(raw_from_physical(s, 2.4) == 2);
}

TEST_CASE("values below the offset encode as negative raw and survive") {
  // Forged traffic can push the angle below the offset; the signed raw field
  // must carry it without clipping.
  SignalSpec s = steering_spec();
  CanFrame f = frame_with(s, -3.0, 2);
  CHECK(std::abs(unpack_signal(f, s) - (-3.0)) <= 0.0005);
}

TEST_CASE("pack/unpack round trip stays within half a scale count") {
  SignalSpec s = steering_spec();
  double lo, hi;
  signal_physical_range(s, lo, hi);
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    double v = rng.uniform(lo + 0.001, hi - 0.001);
    CanFrame f = frame_with(s, v, 2);
    double back = unpack_signal(f, s);
    CHECK(std::abs(back - v) <= s.scale / 2 + 1e-12);
  }
}

TEST_CASE("out-of-range values are rejected, not clipped") {
  SignalSpec s = steering_spec();
  CHECK_THROWS_AS(raw_from_physical(s, 40.0), Error);    // raw 42048 > 32767
  CHECK_THROWS_AS(raw_from_physical(s, -40.0), Error);   // below INT16_MIN
  try {
    raw_from_physical(s, 40.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfRange);
  }
}

TEST_CASE("signal window must fit inside the dlc bytes") {
  SignalSpec s = steering_spec();
  CanFrame f;
  f.dlc = 1;  // 16-bit signal needs 2 bytes
  CHECK_THROWS_AS(unpack_signal(f, s), Error);
  try {
    pack_signal(f, s, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncatedFrame);
  }
}

TEST_CASE("big-endian signals live in the leading payload bytes") {
  SignalSpec s;
  s.start_bit = 48;  // top 16 bits of the big-endian 64-bit view
  s.bit_length = 16;
  s.byte_order = ByteOrder::big;
  s.scale = 0.01;
  s.offset = 0.0;
  CanFrame f;
  f.dlc = 2;
  pack_signal(f, s, 2.58);  // raw 258 = 0x0102
  CHECK(f.data[0] == 0x01);
  CHECK(f.data[1] == 0x02);
  CHECK(unpack_signal(f, s) == doctest::Approx(2.58));

  // With dlc 1 only the top 8 bits exist; the window is no longer covered.
  f.dlc = 1;
  CHECK_THROWS_AS(unpack_signal(f, s), Error);
}

TEST_CASE("packing preserves bits outside the signal window") {
  SignalSpec s;
  s.start_bit = 8;
  s.bit_length = 8;
  s.scale = 1.0;
  s.offset = 0.0;
  CanFrame f;
  f.dlc = 3;
  f.data = {0xaa, 0x00, 0xcc, 0, 0, 0, 0, 0};
  pack_signal(f, s, 5.0);
  CHECK(f.data[0] == 0xaa);
  CHECK(f.data[1] == 0x05);
  CHECK(f.data[2] == 0xcc);
}

TEST_CASE("log line parses to exact fields") {
  CanFrame f = parse_log_line("(0001.000000) can0 0C4#08F4");
  CHECK(f.timestamp_us == 1000000);
  CHECK(f.id == 0x0c4);
  CHECK(f.dlc == 2);
  CHECK(f.data[0] == 0x08);
  CHECK(f.data[1] == 0xf4);
}

TEST_CASE("serialization is canonical and parse inverts it") {
  CanFrame f = parse_log_line("(0001.000000) can0 0C4#08F4");
  CHECK(serialize_log_line(f) == "(0000000001.000000) can0 0c4#08f4");
  CHECK(parse_log_line(serialize_log_line(f)) == f);
}

TEST_CASE("empty payload serializes with a bare hash") {
  CanFrame f;
  f.timestamp_us = 42;
  f.id = 0x7ff;
  f.dlc = 0;
  CHECK(serialize_log_line(f) == "(0000000000.000042) can0 7ff#");
  CHECK(parse_log_line(serialize_log_line(f)) == f);
}

TEST_CASE("nine-byte payload is rejected as BAD_DLC") {
  try {
    parse_log_line("(0001.000000) can0 0C4#0102030405060708aa");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadDlc);
  }
}

TEST_CASE("malformed lines report the column position") {
  try {
    parse_log_line("(0001.000000) can0 0Z4#08F4");
    CHECK(false);
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("MALFORMED_LINE") != std::string::npos);
    CHECK(msg.find("column") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_log_line(""), Error);
  CHECK_THROWS_AS(parse_log_line("(1.0 can0 0c4#"), Error);
  CHECK_THROWS_AS(parse_log_line("(1.0) can0 0c4#0"), Error);     // odd nibble
  CHECK_THROWS_AS(parse_log_line("(1.0) can0 9c4#00"), Error);    // 12-bit id
}

TEST_CASE("parser tolerates short fields and other bus names") {
  CanFrame f = parse_log_line("(1.5) vcan0 1#ff");
  CHECK(f.timestamp_us == 1500000);
  CHECK(f.id == 1);
  CHECK(f.dlc == 1);
  CHECK(f.data[0] == 0xff);
}

TEST_CASE("random frames round trip through text") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    CanFrame f;
    f.timestamp_us = rng.next_u64() % 10000000000ull;
    f.id = static_cast<uint32_t>(rng.below(0x800));
    f.dlc = static_cast<uint8_t>(rng.below(9));
    for (uint8_t b = 0; b < f.dlc; ++b)
      f.data[b] = static_cast<uint8_t>(rng.below(256));
    CHECK(parse_log_line(serialize_log_line(f)) == f);
  }
}

TEST_CASE("whole logs preserve frame order both ways") {
  std::vector<CanFrame> frames;
  for (int i = 0; i < 50; ++i) {
    CanFrame f;
    f.timestamp_us = static_cast<uint64_t>(i) * 20000;
    f.id = 0x0c4;
    f.dlc = 2;
    f.data[0] = static_cast<uint8_t>(i);
    frames.push_back(f);
  }
  auto text = serialize_frame_log(frames);
  auto back = parse_frame_log(text);
  REQUIRE(back.size() == frames.size());
  bool monotone = true;
  for (size_t i = 0; i + 1 < back.size(); ++i)
    monotone = monotone && back[i].timestamp_us <= back[i + 1].timestamp_us;
  CHECK(monotone);
  CHECK(back == frames);
}

TEST_CASE("log parse errors carry the line number") {
  try {
    parse_frame_log("(1.0) can0 0c4#08f4\nnot a frame\n");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
