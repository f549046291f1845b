#pragma once

#include <cstdint>
#include <string>

#include "rcids/can/codec.hpp"
#include "rcids/context/sensors.hpp"
#include "rcids/image/image.hpp"

namespace rcids {

// Parameters of one rendered road scene.
struct SceneParams {
  double curvature = 0.0;    // 1/m, in [-0.01, 0.01]; positive bends right
  double lane_offset = 0.0;  // meters off lane center, in [-1, 1]
  bool night = false;
  uint64_t noise_seed = 0;   // stream for the additive pixel noise
  int horizon_shift = 0;     // pixels, raises/lowers the horizon line
};

// The intact steering controller whose output the genuine CAN frames carry.
struct GroundTruthPolicy {
  double gain = 200.0;  // rad per (1/m) of curvature
  double clip = 2.0;    // output saturates at +/- clip radians
};

constexpr size_t kSceneWidth = 320;
constexpr size_t kSceneHeight = 160;

// Deterministic rasterizer: sky/ground split at the horizon, two lane lines
// swept as quadratic curves that bend with curvature and shift with
// lane_offset, plus seeded additive pixel noise. Night mode darkens the
// base image to a quarter luminance and adds a headlight gradient ahead of
// the car before the noise goes on. Equal params give equal pixels.
ImageBuffer render_scene(const SceneParams& p);

// angle = clip(gain * curvature - 0.2 * lane_offset); the offset term steers
// back toward lane center.
double steering_policy(const SceneParams& p, const GroundTruthPolicy& policy);

// Everything generate_dataset needs to be reproducible from one seed.
struct SynthConfig {
  uint64_t seed = 1;
  size_t count = 100;
  bool night = false;

  size_t window = 8;                  // CAN frames per record
  uint64_t frame_period_us = 20000;   // 50 Hz steering frames
  uint64_t image_period_us = 160000;  // one image per window
  uint64_t start_time_us = 1000000;

  double jitter_sigma = 0.01;  // radians of genuine actuation noise
  GroundTruthPolicy policy;
  SignalSpec signal = steering_signal_spec();
  uint32_t frame_id = 0x0c4;
  uint8_t frame_dlc = 2;

  SensorRanges sensor_ranges;
};

// Scene geometry and sensor readings for record i: smooth seeded
// trajectories (sums of incommensurate sinusoids), so consecutive records
// look like one continuous drive rather than unrelated snapshots.
SceneParams scene_at(const SynthConfig& cfg, size_t i);
SensorSnapshot sensors_at(const SynthConfig& cfg, size_t i);

// The controller output for record i (no jitter; jitter is per frame).
double genuine_angle_at(const SynthConfig& cfg, size_t i);

// Timestamp written to index.csv for record i: the center of its frame
// window, so every frame lies within half a window of it.
uint64_t record_timestamp_us(const SynthConfig& cfg, size_t i);

// Writes the full dataset directory:
//   images/NNNNNN.png   one rendered scene per record
//   frames.log          W frames per record, decoded angle = policy +/- jitter
//   sensors.csv         id,distance_front,water_level,speed
//   index.csv           id,image,timestamp_us,angle
// Regenerating with the same config is byte-identical. IO_FAILURE on write
// problems.
void generate_dataset(const SynthConfig& cfg, const std::string& dir);

}  // namespace rcids
