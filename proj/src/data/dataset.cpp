#include "rcids/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"
#include "rcids/rng.hpp"

namespace rcids {
namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void schema_fail(const std::string& file, size_t row, const std::string& msg) {
  fail(ErrorCode::SchemaError, file + " row " + std::to_string(row) + ": " + msg);
}

double need_double(const std::string& file, size_t row, const std::string& cell,
                   const std::string& what) {
  double v = 0;
  if (!parse_double(cell, v)) schema_fail(file, row, "cannot parse " + what + " '" + cell + "'");
  return v;
}

uint64_t need_u64(const std::string& file, size_t row, const std::string& cell,
                  const std::string& what) {
  uint64_t v = 0;
  if (!parse_u64(cell, v)) schema_fail(file, row, "cannot parse " + what + " '" + cell + "'");
  return v;
}

void need_header(const std::string& file, const CsvTable& t,
                 const std::vector<std::string>& want) {
  if (t.header != want) {
    std::string expect;
    for (const auto& c : want) {
      if (!expect.empty()) expect += ',';
      expect += c;
    }
    fail(ErrorCode::SchemaError, file + " row 1: expected header '" + expect + "'");
  }
}

std::string resolve_path(const std::string& dir, const std::string& p) {
  if (!p.empty() && p.front() == '/') return p;
  return dir + "/" + p;
}

bool frame_before(const CanFrame& a, const CanFrame& b) {
  if (a.timestamp_us != b.timestamp_us) return a.timestamp_us < b.timestamp_us;
  if (a.id != b.id) return a.id < b.id;
  if (a.dlc != b.dlc) return a.dlc < b.dlc;
  return a.data < b.data;
}

}  // namespace

Dataset load_dataset(const std::string& dir, const LoadOptions& opt) {
  Dataset ds;

  // index.csv: one row per record.
  CsvTable index = read_csv_file(dir + "/index.csv");
  need_header("index.csv", index, {"id", "image", "timestamp_us", "angle"});
  std::map<uint64_t, size_t> by_id;
  for (size_t r = 0; r < index.rows.size(); ++r) {
    const auto& row = index.rows[r];
    const size_t line = r + 2;
    if (row.size() != 4)
      schema_fail("index.csv", line, "expected 4 columns, got " + std::to_string(row.size()));
    Record rec;
    rec.id = need_u64("index.csv", line, row[0], "id");
    rec.image_path = resolve_path(dir, row[1]);
    rec.timestamp_us = need_u64("index.csv", line, row[2], "timestamp_us");
    rec.genuine_angle = need_double("index.csv", line, row[3], "angle");
    if (!by_id.emplace(rec.id, ds.records.size()).second)
      schema_fail("index.csv", line, "duplicate id " + row[0]);
    ds.records.push_back(std::move(rec));
  }

  // sensors.csv: exactly one row per record id.
  CsvTable sensors = read_csv_file(dir + "/sensors.csv");
  need_header("sensors.csv", sensors, {"id", "distance_front", "water_level", "speed"});
  std::map<uint64_t, bool> sensed;
  for (size_t r = 0; r < sensors.rows.size(); ++r) {
    const auto& row = sensors.rows[r];
    const size_t line = r + 2;
    if (row.size() != 4)
      schema_fail("sensors.csv", line, "expected 4 columns, got " + std::to_string(row.size()));
    uint64_t id = need_u64("sensors.csv", line, row[0], "id");
    auto it = by_id.find(id);
    if (it == by_id.end()) schema_fail("sensors.csv", line, "unknown record id " + row[0]);
    if (sensed[id]) schema_fail("sensors.csv", line, "duplicate id " + row[0]);
    sensed[id] = true;
    Record& rec = ds.records[it->second];
    rec.sensors.distance_front = need_double("sensors.csv", line, row[1], "distance_front");
    rec.sensors.water_level = need_double("sensors.csv", line, row[2], "water_level");
    rec.sensors.speed = need_double("sensors.csv", line, row[3], "speed");
  }
  for (const auto& [id, pos] : by_id) {
    if (!sensed.count(id))
      fail(ErrorCode::SchemaError,
           "sensors.csv: no row for record id " + std::to_string(id));
  }

  // Labels from the manipulation audit, when one is present.
  for (const ManipulationRow& m : read_manipulations(dir + "/manipulations.csv")) {
    auto it = by_id.find(m.id);
    if (it == by_id.end())
      fail(ErrorCode::SchemaError,
           "manipulations.csv: unknown record id " + std::to_string(m.id));
    ds.records[it->second].label = 1;
  }

  for (const Record& rec : ds.records) {
    if (!file_exists(rec.image_path))
      fail(ErrorCode::MissingImage,
           "record " + std::to_string(rec.id) + ": missing image " + rec.image_path);
  }

  std::sort(ds.records.begin(), ds.records.end(), [](const Record& a, const Record& b) {
    return a.timestamp_us != b.timestamp_us ? a.timestamp_us < b.timestamp_us : a.id < b.id;
  });

  std::vector<CanFrame> frames = read_frame_log(dir + "/frames.log");
  if (ds.records.empty()) {
    if (!frames.empty())
      fail(ErrorCode::MisalignedFrames, "frames.log has frames but index.csv has no records");
    return ds;
  }

  // Nearest-timestamp window assignment. With N >= 2 records, half the
  // smallest record spacing bounds how far a frame may sit from its record.
  std::vector<uint64_t> ts(ds.records.size());
  for (size_t i = 0; i < ds.records.size(); ++i) ts[i] = ds.records[i].timestamp_us;
  uint64_t spacing = std::numeric_limits<uint64_t>::max();
  for (size_t i = 1; i < ts.size(); ++i) spacing = std::min(spacing, ts[i] - ts[i - 1]);

  for (const CanFrame& f : frames) {
    auto it = std::lower_bound(ts.begin(), ts.end(), f.timestamp_us);
    size_t hi = static_cast<size_t>(it - ts.begin());
    size_t pick;
    if (hi == 0) {
      pick = 0;
    } else if (hi == ts.size()) {
      pick = ts.size() - 1;
    } else {
      uint64_t up = ts[hi] - f.timestamp_us;
      uint64_t down = f.timestamp_us - ts[hi - 1];
      pick = down <= up ? hi - 1 : hi;  // ties go to the earlier record
    }
    uint64_t gap = f.timestamp_us > ts[pick] ? f.timestamp_us - ts[pick] : ts[pick] - f.timestamp_us;
    if (ts.size() >= 2 && gap > spacing / 2)
      fail(ErrorCode::MisalignedFrames,
           "frame at t=" + std::to_string(f.timestamp_us) + "us lies " + std::to_string(gap) +
               "us from record " + std::to_string(ds.records[pick].id) +
               " (record spacing " + std::to_string(spacing) + "us)");
    ds.records[pick].frames.push_back(f);
  }

  const size_t window = ds.records.front().frames.size();
  for (const Record& rec : ds.records) {
    if (rec.frames.size() != window)
      fail(ErrorCode::MisalignedFrames,
           "record " + std::to_string(rec.id) + " has " + std::to_string(rec.frames.size()) +
               " frames where others have " + std::to_string(window));
  }
  if (window == 0)
    fail(ErrorCode::MisalignedFrames, "frames.log assigns no frames to any record");
  ds.window = window;

  for (Record& rec : ds.records) {
    std::sort(rec.frames.begin(), rec.frames.end(), frame_before);
    rec.angles.reserve(window);
    for (const CanFrame& f : rec.frames) rec.angles.push_back(unpack_signal(f, opt.signal));
  }
  return ds;
}

Split split_70_30(const std::vector<Record>& records, uint64_t seed) {
  if (records.size() < 2)
    fail(ErrorCode::TooFewRecords,
         "need at least 2 records to split, got " + std::to_string(records.size()));

  std::vector<uint64_t> ids;
  ids.reserve(records.size());
  for (const Record& r : records) ids.push_back(r.id);

  Rng rng(mix_key(seed, 0, 0, stream::kSplit));
  for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);

  // floor(0.7 * N) in exact integer arithmetic.
  const size_t train_count = records.size() * 7 / 10;
  Split s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<long>(train_count));
  s.test.assign(ids.begin() + static_cast<long>(train_count), ids.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

std::vector<ManipulationRow> read_manipulations(const std::string& path) {
  if (!file_exists(path)) return {};
  CsvTable t = read_csv_file(path);
  need_header("manipulations.csv", t, {"index", "original", "forged", "rule"});
  std::vector<ManipulationRow> rows;
  rows.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const size_t line = r + 2;
    if (row.size() != 4)
      schema_fail("manipulations.csv", line,
                  "expected 4 columns, got " + std::to_string(row.size()));
    ManipulationRow m;
    m.id = need_u64("manipulations.csv", line, row[0], "index");
    m.original = need_double("manipulations.csv", line, row[1], "original");
    m.forged = need_double("manipulations.csv", line, row[2], "forged");
    m.rule = row[3];
    if (m.rule != "flip" && m.rule != "offset")
      schema_fail("manipulations.csv", line, "unknown rule '" + m.rule + "'");
    rows.push_back(std::move(m));
  }
  return rows;
}

void write_manipulations(const std::string& path, const std::vector<ManipulationRow>& rows) {
  std::string out = "index,original,forged,rule\n";
  for (const ManipulationRow& m : rows) {
    out += join_csv_line({std::to_string(m.id), format_double(m.original),
                          format_double(m.forged), m.rule});
    out.push_back('\n');
  }
  write_file(path, out);
}

void import_external_csv(const std::string& csv_path, const ExternalSchema& schema,
                         const std::string& out_dir) {
  if (schema.window < 1) fail(ErrorCode::ConfigError, "window must be >= 1");

  double angle_scale = 1.0;
  if (schema.angle_unit == "degree") {
    angle_scale = kPi / 180.0;
  } else if (schema.angle_unit != "radian") {
    fail(ErrorCode::ConfigError, "unknown angle unit '" + schema.angle_unit + "'");
  }
  if (schema.timestamp_unit != "us" && schema.timestamp_unit != "ns" &&
      schema.timestamp_unit != "s") {
    fail(ErrorCode::ConfigError, "unknown timestamp unit '" + schema.timestamp_unit + "'");
  }

  CsvTable t = read_csv_file(csv_path);
  auto column_index = [&](const std::string& name) {
    for (size_t i = 0; i < t.header.size(); ++i) {
      if (t.header[i] == name) return i;
    }
    fail(ErrorCode::SchemaError, "column '" + name + "' not found in " + csv_path);
  };
  const size_t c_ts = column_index(schema.timestamp_column);
  const size_t c_img = column_index(schema.image_column);
  const size_t c_ang = column_index(schema.angle_column);

  ensure_directory(out_dir);
  ensure_directory(out_dir + "/images");
  const std::string base = std::filesystem::path(csv_path).parent_path().string();

  std::string index_csv = "id,image,timestamp_us,angle\n";
  std::string sensors_csv = "id,distance_front,water_level,speed\n";
  std::vector<CanFrame> frames;
  frames.reserve(t.rows.size() * schema.window);
  const uint64_t half = (schema.window - 1) * schema.frame_period_us / 2;

  for (size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const size_t line = r + 2;
    if (row.size() != t.header.size())
      schema_fail(csv_path, line, "expected " + std::to_string(t.header.size()) +
                                      " columns, got " + std::to_string(row.size()));

    uint64_t ts_us = 0;
    if (schema.timestamp_unit == "us") {
      ts_us = need_u64(csv_path, line, row[c_ts], "timestamp");
    } else if (schema.timestamp_unit == "ns") {
      ts_us = need_u64(csv_path, line, row[c_ts], "timestamp") / 1000;
    } else {
      double sec = need_double(csv_path, line, row[c_ts], "timestamp");
      if (sec < 0) schema_fail(csv_path, line, "negative timestamp");
      ts_us = static_cast<uint64_t>(std::llround(sec * 1e6));
    }
    if (ts_us < half)
      schema_fail(csv_path, line, "timestamp too small to center a " +
                                      std::to_string(schema.window) + "-frame window");

    const double angle = need_double(csv_path, line, row[c_ang], "angle") * angle_scale;

    char name[32];
    std::snprintf(name, sizeof name, "images/%06zu.png", r);
    write_file(out_dir + "/" + name, read_file(resolve_path(base, row[c_img])));

    index_csv += join_csv_line(
        {std::to_string(r), name, std::to_string(ts_us), format_double(angle)});
    index_csv.push_back('\n');
    sensors_csv += join_csv_line({std::to_string(r), "0", "0", "0"});
    sensors_csv.push_back('\n');

    const uint64_t t0 = ts_us - half;
    for (size_t j = 0; j < schema.window; ++j) {
      CanFrame f;
      f.timestamp_us = t0 + j * schema.frame_period_us;
      f.id = schema.frame_id;
      f.dlc = schema.frame_dlc;
      pack_signal(f, schema.signal, angle);
      frames.push_back(f);
    }
  }

  write_frame_log(out_dir + "/frames.log", frames);
  write_file(out_dir + "/index.csv", index_csv);
  write_file(out_dir + "/sensors.csv", sensors_csv);
}

}  // namespace rcids
