#pragma once

#include <utility>
#include <vector>

#include "rcids/context/sensors.hpp"
#include "rcids/image/image.hpp"
#include "rcids/nn/checkpoint.hpp"

namespace rcids {

// Stage 1 of the detector: camera image + sensors -> road-context vector.

// Center-crop to square, bilinear-resize to 100x100, scale to [0,1], subtract
// the per-channel dataset mean (stored in the CNN checkpoint at train time).
// IMAGE_TOO_SMALL when either source dimension is under 100.
Tensor preprocess_image(const ImageBuffer& img, const float channel_mean[3]);

// Eval-mode forward pass through the road-context CNN; output has exactly
// 100 values. CHECKPOINT_MISMATCH when the checkpoint is not that model.
Tensor extract_features(const Tensor& preprocessed, const Checkpoint& cnn);

// Concatenate [features || min-max-normalized sensors] in the fixed order
// distance_front, water_level, speed. SENSOR_OUT_OF_RANGE when a value
// leaves its configured range (or is not finite).
std::vector<float> build_context_vector(const Tensor& features, const SensorSnapshot& sensors,
                                        const SensorRanges& ranges);

// Generic core of the concatenation, usable with any (value, range) list;
// an empty list returns the features unchanged.
std::vector<float> append_normalized_sensors(
    const Tensor& features, const std::vector<std::pair<double, SensorRange>>& sensors);

// Full stage 1 on one record.
std::vector<float> road_context(const ImageBuffer& img, const SensorSnapshot& sensors,
                                const Checkpoint& cnn, const SensorRanges& ranges);

}  // namespace rcids
