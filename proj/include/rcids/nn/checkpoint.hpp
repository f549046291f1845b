#pragma once

#include <cstdint>
#include <string>

#include "rcids/nn/network.hpp"

namespace rcids {

// What a checkpoint file holds.
constexpr uint8_t kModelCnn = 1;         // road-context CNN
constexpr uint8_t kModelClassifier = 2;  // window classifier
constexpr uint8_t kModelBaseline = 3;    // history-only predictor

struct CheckpointMeta {
  uint64_t seed = 0;           // training seed
  uint32_t epochs = 0;         // epochs actually run
  float final_loss = 0;        // last recorded training loss
  float channel_mean[3] = {0, 0, 0};  // preprocessing means (CNN checkpoints)
  float threshold = 0.5f;      // decision threshold / anomaly threshold tau
  uint32_t window = 0;         // frame window width (classifier/baseline)
  uint32_t hidden = 0;         // recurrent hidden width (baseline)
};

struct Checkpoint {
  uint8_t model_kind = 0;
  CheckpointMeta meta;
  Network net;
};

// Binary layout (little-endian throughout):
//   magic "RCIDSCKP", u16 version=1, u8 model_kind, u8 zero, u32 layer_count,
//   64-byte meta block (fields above in order, zero padded),
//   then per layer: u8 kind, kind-specific payload:
//     conv2d:  u32 stride, weight tensor, bias tensor
//     dense:   weight tensor, bias tensor
//     relu:    nothing
//     dropout: f32 keep_prob
//   tensor = u8 ndim, u32 dims[ndim], f32 data[product(dims)].
// Dense weight tensors are stored input-major: shape [in, out].
// Serialization round-trips bit-exactly; any structural defect loads as
// CHECKPOINT_CORRUPT.
std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint deserialize_checkpoint(const std::string& bytes);
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

// Propagates a per-sample input shape through the layers (throws
// SHAPE_MISMATCH if some layer cannot accept what the previous one emits).
std::vector<size_t> propagate_shape(const Network& net, std::vector<size_t> in_shape);

// Structural validation for consumers; throw CHECKPOINT_MISMATCH when the
// loaded model is not the kind of network the caller needs.
void require_context_cnn(const Checkpoint& c);
void require_window_classifier(const Checkpoint& c, size_t input_width);

}  // namespace rcids
