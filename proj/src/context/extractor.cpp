#include "rcids/context/extractor.hpp"

#include <cmath>
#include <string>

#include "rcids/error.hpp"
#include "rcids/nn/network.hpp"

namespace rcids {

Tensor preprocess_image(const ImageBuffer& img, const float channel_mean[3]) {
  if (img.width < kImageSide || img.height < kImageSide) {
    fail(ErrorCode::ImageTooSmall,
         "image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
             ", need at least 100x100");
  }
  ImageBuffer scaled = resize_bilinear(center_crop_square(img), kImageSide, kImageSide);

  Tensor t({kImageSide, kImageSide, kImageChannels});
  for (size_t i = 0; i < scaled.pixels.size(); ++i) {
    t.data[i] = static_cast<float>(scaled.pixels[i]) / 255.0f - channel_mean[i % 3];
  }
  return t;
}

Tensor extract_features(const Tensor& preprocessed, const Checkpoint& cnn) {
  require_context_cnn(cnn);
  if (preprocessed.shape != std::vector<size_t>{kImageSide, kImageSide, kImageChannels}) {
    fail(ErrorCode::ShapeMismatch,
         "preprocessed image must be 100x100x3, got " + shape_text(preprocessed.shape));
  }
  Tensor batched({1, kImageSide, kImageSide, kImageChannels}, preprocessed.data);
  Tensor out = network_forward(cnn.net, batched, NetMode::eval, 0, Exec::parallel, nullptr);
  return Tensor({kFeatureWidth}, std::move(out.data));
}

std::vector<float> append_normalized_sensors(
    const Tensor& features, const std::vector<std::pair<double, SensorRange>>& sensors) {
  std::vector<float> out = features.data;
  out.reserve(out.size() + sensors.size());
  for (size_t k = 0; k < sensors.size(); ++k) {
    double v = sensors[k].first;
    const SensorRange& r = sensors[k].second;
    if (!std::isfinite(v) || v < r.lo || v > r.hi) {
      fail(ErrorCode::SensorOutOfRange,
           "sensor " + std::to_string(k) + " value " + std::to_string(v) + " outside [" +
               std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
    }
    out.push_back(static_cast<float>((v - r.lo) / (r.hi - r.lo)));
  }
  return out;
}

std::vector<float> build_context_vector(const Tensor& features, const SensorSnapshot& sensors,
                                        const SensorRanges& ranges) {
  return append_normalized_sensors(features,
                                   {{sensors.distance_front, ranges.distance_front},
                                    {sensors.water_level, ranges.water_level},
                                    {sensors.speed, ranges.speed}});
}

std::vector<float> road_context(const ImageBuffer& img, const SensorSnapshot& sensors,
                                const Checkpoint& cnn, const SensorRanges& ranges) {
  Tensor pre = preprocess_image(img, cnn.meta.channel_mean);
  return build_context_vector(extract_features(pre, cnn), sensors, ranges);
}

}  // namespace rcids
