#include "rcids/nn/checkpoint.hpp"

#include <cstring>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"

namespace rcids {
namespace {

constexpr char kMagic[8] = {'R', 'C', 'I', 'D', 'S', 'C', 'K', 'P'};
constexpr uint16_t kVersion = 1;
constexpr size_t kMetaBytes = 64;

void write_tensor(ByteWriter& w, const Tensor& t) {
  if (t.shape.empty() || t.shape.size() > 255) {
    fail(ErrorCode::CheckpointCorrupt, "tensor rank out of range");
  }
  w.u8(static_cast<uint8_t>(t.shape.size()));
  for (size_t d : t.shape) w.u32(static_cast<uint32_t>(d));
  for (float v : t.data) w.f32(v);
}

Tensor read_tensor(ByteReader& r) {
  size_t ndim = r.u8();
  if (ndim == 0) fail(ErrorCode::CheckpointCorrupt, "tensor rank is zero");
  std::vector<size_t> shape(ndim);
  size_t count = 1;
  for (size_t i = 0; i < ndim; ++i) {
    shape[i] = r.u32();
    if (shape[i] == 0 || count > (1u << 30) / shape[i]) {
      fail(ErrorCode::CheckpointCorrupt, "tensor dimensions implausible");
    }
    count *= shape[i];
  }
  std::vector<float> data(count);
  for (size_t i = 0; i < count; ++i) data[i] = r.f32();
  return Tensor(std::move(shape), std::move(data));
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  w.bytes(kMagic, sizeof kMagic);
  w.u16(kVersion);
  w.u8(c.model_kind);
  w.u8(0);
  w.u32(static_cast<uint32_t>(c.net.layers.size()));

  // Fixed 64-byte metadata block.
  size_t meta_start = w.data().size();
  w.u64(c.meta.seed);
  w.u32(c.meta.epochs);
  w.f32(c.meta.final_loss);
  for (float m : c.meta.channel_mean) w.f32(m);
  w.f32(c.meta.threshold);
  w.u32(c.meta.window);
  w.u32(c.meta.hidden);
  while (w.data().size() - meta_start < kMetaBytes) w.u8(0);

  for (const LayerParams& layer : c.net.layers) {
    w.u8(static_cast<uint8_t>(layer.kind));
    switch (layer.kind) {
      case LayerKind::conv2d:
        w.u32(static_cast<uint32_t>(layer.stride));
        write_tensor(w, layer.weights);
        write_tensor(w, layer.bias);
        break;
      case LayerKind::dense:
        write_tensor(w, layer.weights);
        write_tensor(w, layer.bias);
        break;
      case LayerKind::relu:
        break;
      case LayerKind::dropout:
        w.f32(layer.keep_prob);
        break;
      default:
        fail(ErrorCode::CheckpointCorrupt, "unknown layer kind in network");
    }
  }
  return w.data();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  ByteReader r(bytes, ErrorCode::CheckpointCorrupt);

  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    fail(ErrorCode::CheckpointCorrupt, "bad checkpoint magic");
  }
  uint16_t version = r.u16();
  if (version != kVersion) {
    fail(ErrorCode::CheckpointCorrupt,
         "unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint c;
  c.model_kind = r.u8();
  if (c.model_kind < kModelCnn || c.model_kind > kModelBaseline) {
    fail(ErrorCode::CheckpointCorrupt, "unknown model kind tag");
  }
  r.u8();  // reserved
  uint32_t layer_count = r.u32();
  if (layer_count > 4096) {
    fail(ErrorCode::CheckpointCorrupt, "layer count implausible");
  }

  size_t before_meta = r.remaining();
  c.meta.seed = r.u64();
  c.meta.epochs = r.u32();
  c.meta.final_loss = r.f32();
  for (float& m : c.meta.channel_mean) m = r.f32();
  c.meta.threshold = r.f32();
  c.meta.window = r.u32();
  c.meta.hidden = r.u32();
  while (before_meta - r.remaining() < kMetaBytes) r.u8();

  for (uint32_t i = 0; i < layer_count; ++i) {
    LayerParams layer;
    uint8_t kind = r.u8();
    switch (kind) {
      case static_cast<uint8_t>(LayerKind::conv2d):
        layer.kind = LayerKind::conv2d;
        layer.stride = r.u32();
        if (layer.stride == 0) {
          fail(ErrorCode::CheckpointCorrupt, "conv stride is zero");
        }
        layer.weights = read_tensor(r);
        layer.bias = read_tensor(r);
        if (layer.weights.shape.size() != 4 || layer.bias.shape.size() != 1 ||
            layer.bias.shape[0] != layer.weights.shape[3]) {
          fail(ErrorCode::CheckpointCorrupt, "conv parameter shapes inconsistent");
        }
        break;
      case static_cast<uint8_t>(LayerKind::dense):
        layer.kind = LayerKind::dense;
        layer.weights = read_tensor(r);
        layer.bias = read_tensor(r);
        if (layer.weights.shape.size() != 2 || layer.bias.shape.size() != 1 ||
            layer.bias.shape[0] != layer.weights.shape[1]) {
          fail(ErrorCode::CheckpointCorrupt, "dense parameter shapes inconsistent");
        }
        break;
      case static_cast<uint8_t>(LayerKind::relu):
        layer.kind = LayerKind::relu;
        break;
      case static_cast<uint8_t>(LayerKind::dropout):
        layer.kind = LayerKind::dropout;
        layer.keep_prob = r.f32();
        if (!(layer.keep_prob > 0.0f && layer.keep_prob <= 1.0f)) {
          fail(ErrorCode::CheckpointCorrupt, "dropout keep probability out of range");
        }
        break;
      default:
        fail(ErrorCode::CheckpointCorrupt, "unknown layer kind tag");
    }
    c.net.layers.push_back(std::move(layer));
  }

  if (!r.done()) {
    fail(ErrorCode::CheckpointCorrupt, "trailing bytes after last layer");
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  write_file(path, serialize_checkpoint(c));
}

Checkpoint load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

std::vector<size_t> propagate_shape(const Network& net, std::vector<size_t> in_shape) {
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const LayerParams& layer = net.layers[i];
    switch (layer.kind) {
      case LayerKind::conv2d: {
        if (in_shape.size() != 3) {
          fail(ErrorCode::ShapeMismatch,
               "layer " + std::to_string(i) + ": conv2d needs a HxWxC input");
        }
        if (layer.weights.shape[2] != in_shape[2]) {
          fail(ErrorCode::ShapeMismatch,
               "layer " + std::to_string(i) + ": conv2d expects " +
                   std::to_string(layer.weights.shape[2]) + " channels, got " +
                   std::to_string(in_shape[2]));
        }
        ConvShape cs = conv_geometry(1, in_shape[0], in_shape[1], in_shape[2],
                                     layer.weights.shape[0], layer.weights.shape[1],
                                     layer.weights.shape[3], layer.stride);
        in_shape = {cs.out_h, cs.out_w, cs.out_c};
        break;
      }
      case LayerKind::dense: {
        size_t flat = 1;
        for (size_t d : in_shape) flat *= d;
        if (flat != layer.weights.shape[0]) {
          fail(ErrorCode::ShapeMismatch,
               "layer " + std::to_string(i) + ": dense expects " +
                   std::to_string(layer.weights.shape[0]) + " inputs, got " +
                   std::to_string(flat));
        }
        in_shape = {layer.weights.shape[1]};
        break;
      }
      case LayerKind::relu:
      case LayerKind::dropout:
        break;
    }
  }
  return in_shape;
}

void require_context_cnn(const Checkpoint& c) {
  if (c.model_kind != kModelCnn) {
    fail(ErrorCode::CheckpointMismatch, "checkpoint is not a road-context CNN");
  }
  try {
    std::vector<size_t> out =
        propagate_shape(c.net, {kImageSide, kImageSide, kImageChannels});
    if (out != std::vector<size_t>{kFeatureWidth}) {
      fail(ErrorCode::CheckpointMismatch, "CNN does not emit a 100-wide feature vector");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CheckpointMismatch) throw;
    fail(ErrorCode::CheckpointMismatch,
         std::string("CNN topology rejects a 100x100x3 image: ") + e.what());
  }
}

void require_window_classifier(const Checkpoint& c, size_t input_width) {
  if (c.model_kind != kModelClassifier) {
    fail(ErrorCode::CheckpointMismatch, "checkpoint is not a window classifier");
  }
  try {
    std::vector<size_t> out = propagate_shape(c.net, {input_width});
    if (out != std::vector<size_t>{1}) {
      fail(ErrorCode::CheckpointMismatch, "classifier does not emit a single score");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CheckpointMismatch) throw;
    fail(ErrorCode::CheckpointMismatch,
         std::string("classifier rejects a ") + std::to_string(input_width) +
             "-wide context vector: " + e.what());
  }
}

}  // namespace rcids
