#pragma once

#include <cstddef>

namespace rcids {

// Numeric sensor readings accompanying one camera image.
struct SensorSnapshot {
  double distance_front = 0.0;  // meters to the nearest object ahead
  double water_level = 0.0;     // normalized [0,1]
  double speed = 0.0;           // km/h
};

struct SensorRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Min-max normalization ranges for the fixed sensor order
// [distance_front, water_level, speed].
struct SensorRanges {
  SensorRange distance_front{0.0, 100.0};
  SensorRange water_level{0.0, 1.0};
  SensorRange speed{0.0, 160.0};
};

constexpr size_t kSensorCount = 3;

}  // namespace rcids
