#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcids/can/codec.hpp"
#include "rcids/context/sensors.hpp"

namespace rcids {

// One aligned sample: camera image + sensor readings + the window of CAN
// frames captured around the image timestamp.
struct Record {
  uint64_t id = 0;
  std::string image_path;  // resolved against the dataset directory
  uint64_t timestamp_us = 0;
  SensorSnapshot sensors;
  std::vector<CanFrame> frames;  // time-sorted, exactly `window` of them
  std::vector<double> angles;    // decoded steering angles, most recent last
  double genuine_angle = 0.0;    // controller output recorded at generation
  int label = 0;                 // 0 genuine, 1 forged (from manipulations.csv)
};

struct Dataset {
  std::vector<Record> records;  // sorted by timestamp
  size_t window = 0;            // frames per record, uniform across records
};

struct LoadOptions {
  SignalSpec signal = steering_signal_spec();
};

// Reads the on-disk layout (index.csv, sensors.csv, frames.log, images/,
// optional manipulations.csv). Records come back sorted by timestamp; every
// frame goes to the record with the nearest timestamp. Validation:
//   MISSING_IMAGE      a referenced image file does not exist (names the id)
//   MISALIGNED_FRAMES  per-record frame counts are not uniform, or a frame
//                      sits further than half the record spacing from its
//                      record's timestamp
//   SCHEMA_ERROR       malformed tables (named file + row number)
// A shuffled frames.log loads to identical records: assignment and in-window
// order depend only on timestamps, not on line order.
Dataset load_dataset(const std::string& dir, const LoadOptions& opt = {});

struct Split {
  std::vector<uint64_t> train;  // record ids, ascending
  std::vector<uint64_t> test;
};

// Seeded uniform shuffle, then the first floor(0.7*N) ids become the training
// set. Disjoint and exhaustive by construction; deterministic per seed.
// TOO_FEW_RECORDS when N < 2.
Split split_70_30(const std::vector<Record>& records, uint64_t seed);

// Audit row for one forged record; the id column matches Record::id.
struct ManipulationRow {
  uint64_t id = 0;
  double original = 0.0;
  double forged = 0.0;
  std::string rule;  // "flip" | "offset"
};

// manipulations.csv next to the forged frames.log. Reading a path that does
// not exist returns an empty list (an all-genuine dataset).
std::vector<ManipulationRow> read_manipulations(const std::string& path);
void write_manipulations(const std::string& path, const std::vector<ManipulationRow>& rows);

// Column mapping for adapting an external driving-log CSV.
struct ExternalSchema {
  std::string timestamp_column = "timestamp";
  std::string image_column = "filename";
  std::string angle_column = "angle";
  std::string angle_unit = "radian";   // "radian" | "degree"
  std::string timestamp_unit = "us";   // "us" | "ns" | "s"
  size_t window = 8;                   // frames synthesized per record
  uint64_t frame_period_us = 20000;
  SignalSpec signal = steering_signal_spec();
  uint32_t frame_id = 0x0c4;
  uint8_t frame_dlc = 2;
};

// Converts an external CSV (at least timestamp/image/angle columns, named by
// the schema) into the internal layout under out_dir. Angles are stored in
// radians (converted when angle_unit == "degree", passed through otherwise);
// image files are copied in; each record gets `window` synthesized frames
// centered on its timestamp carrying the recorded angle. External rows have
// no readings for this toolkit's sensors, so sensors.csv is written with
// all-zero values (in range for every default sensor). SCHEMA_ERROR names a
// missing column or the offending row.
void import_external_csv(const std::string& csv_path, const ExternalSchema& schema,
                         const std::string& out_dir);

}  // namespace rcids
