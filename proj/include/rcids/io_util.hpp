#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcids/error.hpp"

namespace rcids {

// --- binary serialization -------------------------------------------------
// All on-disk binary formats are little-endian regardless of host order;
// these helpers do explicit byte packing so that is true by construction.

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void f32(float v);
  void f64(double v);
  void bytes(const void* p, size_t n);
  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  // on_truncation is thrown when a read runs past the end of the buffer.
  ByteReader(const std::string& data, ErrorCode on_truncation)
      : data_(data), code_(on_truncation) {}
  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  float f32();
  double f64();
  void bytes(void* p, size_t n);
  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  const std::string& data_;
  ErrorCode code_;
  size_t pos_ = 0;
};

// --- number formatting ----------------------------------------------------
// Shortest text that round-trips exactly (std::to_chars), used everywhere a
// float lands in a CSV so re-reading a file reproduces the value bit for bit.
std::string format_double(double v);
std::string format_float(float v);

// Fixed-point with the given number of decimals (for timestamps and report
// prose where a stable column width matters more than round-tripping).
std::string format_fixed(double v, int decimals);

// Strict parse of a full token; returns false on trailing garbage or empty.
bool parse_double(const std::string& s, double& out);
bool parse_u64(const std::string& s, uint64_t& out);
bool parse_i64(const std::string& s, int64_t& out);

// --- CSV ------------------------------------------------------------------
// Minimal RFC-4180 subset: comma separated, optional double-quoting with ""
// escapes, one record per line. Enough for our own files and for the
// steering-log exports this tool imports.
std::vector<std::string> split_csv_line(const std::string& line);
std::string join_csv_line(const std::vector<std::string>& fields);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Column index by header name, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable read_csv_file(const std::string& path);

// --- files ----------------------------------------------------------------
std::string read_file(const std::string& path);  // throws IO_FAILURE
void write_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
void ensure_directory(const std::string& path);  // mkdir -p semantics

// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ" (the one intentionally
// non-reproducible string the toolkit emits).
std::string utc_timestamp();

}  // namespace rcids
