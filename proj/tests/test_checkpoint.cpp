#include <doctest.h>

#include <cstring>
#include <vector>

#include "rcids/error.hpp"
#include "rcids/nn/checkpoint.hpp"
#include "rcids/rng.hpp"

using namespace rcids;

namespace {

Checkpoint sample_classifier() {
  Checkpoint c;
  c.model_kind = kModelClassifier;
  c.meta.seed = 0x0123456789abcdefull;
  c.meta.epochs = 12;
  c.meta.final_loss = 0.125f;
  c.meta.channel_mean[0] = 0.25f;
  c.meta.channel_mean[1] = 0.5f;
  c.meta.channel_mean[2] = 0.75f;
  c.meta.threshold = 0.625f;
  c.meta.window = 8;
  c.meta.hidden = 64;
  c.net = make_window_classifier<float>(111, 64, 42);
  return c;
}

ErrorCode code_of(const std::string& bytes) {
  try {
    deserialize_checkpoint(bytes);
    return ErrorCode::ConfigError;  // sentinel: "did not throw"
  } catch (const Error& e) {
    return e.code();
  }
}

}  // namespace

TEST_CASE("checkpoint serialization round-trips bit-exactly") {
  Checkpoint c = sample_classifier();
  std::string bytes = serialize_checkpoint(c);
  Checkpoint back = deserialize_checkpoint(bytes);

  CHECK(back.model_kind == c.model_kind);
  CHECK(back.meta.seed == c.meta.seed);
  CHECK(back.meta.epochs == c.meta.epochs);
  CHECK(back.meta.final_loss == c.meta.final_loss);
  for (int i = 0; i < 3; ++i) CHECK(back.meta.channel_mean[i] == c.meta.channel_mean[i]);
  CHECK(back.meta.threshold == c.meta.threshold);
  CHECK(back.meta.window == c.meta.window);
  CHECK(back.meta.hidden == c.meta.hidden);

  REQUIRE(back.net.layers.size() == c.net.layers.size());
  for (size_t i = 0; i < c.net.layers.size(); ++i) {
    CHECK(back.net.layers[i].kind == c.net.layers[i].kind);
    CHECK(back.net.layers[i].stride == c.net.layers[i].stride);
    CHECK(back.net.layers[i].weights.shape == c.net.layers[i].weights.shape);
    CHECK(std::memcmp(back.net.layers[i].weights.ptr(), c.net.layers[i].weights.ptr(),
                      c.net.layers[i].weights.numel() * sizeof(float)) == 0);
    CHECK(std::memcmp(back.net.layers[i].bias.ptr(), c.net.layers[i].bias.ptr(),
                      c.net.layers[i].bias.numel() * sizeof(float)) == 0);
  }

  // Re-serializing the loaded copy reproduces the byte stream exactly.
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint with conv and dropout layers survives the trip") {
  Checkpoint c;
  c.model_kind = kModelCnn;
  Rng rng(7);
  c.net.layers.push_back(make_conv_layer<float>(3, 4, 2, rng));
  c.net.layers.push_back(make_relu_layer<float>());
  c.net.layers.push_back(make_dropout_layer<float>(0.5f));
  c.net.layers.push_back(make_dense_layer<float>(16, 2, rng));
  std::string bytes = serialize_checkpoint(c);
  Checkpoint back = deserialize_checkpoint(bytes);
  CHECK(back.net.layers.size() == 4);
  CHECK(back.net.layers[0].stride == 2);
  CHECK(back.net.layers[2].keep_prob == 0.5f);
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("structurally damaged checkpoints load as CHECKPOINT_CORRUPT") {
  std::string good = serialize_checkpoint(sample_classifier());

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(code_of(bad_magic) == ErrorCode::CheckpointCorrupt);

  std::string bad_version = good;
  bad_version[8] = 9;
  CHECK(code_of(bad_version) == ErrorCode::CheckpointCorrupt);

  std::string bad_kind = good;
  bad_kind[10] = 77;
  CHECK(code_of(bad_kind) == ErrorCode::CheckpointCorrupt);

  std::string truncated = good.substr(0, good.size() / 2);
  CHECK(code_of(truncated) == ErrorCode::CheckpointCorrupt);

  std::string trailing = good + "zz";
  CHECK(code_of(trailing) == ErrorCode::CheckpointCorrupt);

  CHECK(code_of(std::string()) == ErrorCode::CheckpointCorrupt);
  CHECK(code_of(std::string("short")) == ErrorCode::CheckpointCorrupt);
}

TEST_CASE("save/load through a file preserves the byte stream") {
  Checkpoint c = sample_classifier();
  std::string path = "ckpt_roundtrip.bin";
  save_checkpoint(path, c);
  Checkpoint back = load_checkpoint(path);
  CHECK(serialize_checkpoint(back) == serialize_checkpoint(c));
  std::remove(path.c_str());
}

TEST_CASE("consumers validate model kind and topology") {
  Checkpoint cnn;
  cnn.model_kind = kModelCnn;
  cnn.net = make_context_cnn<float>(1);
  CHECK_NOTHROW(require_context_cnn(cnn));

  Checkpoint cls = sample_classifier();
  CHECK_NOTHROW(require_window_classifier(cls, 111));

  // Wrong kind tag.
  try {
    require_context_cnn(cls);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CheckpointMismatch);
  }

  // Right kind, wrong width.
  try {
    require_window_classifier(cls, 107);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CheckpointMismatch);
  }

  // Shape propagation matches the CNN contract.
  std::vector<size_t> out = propagate_shape(cnn.net, {100, 100, 3});
  CHECK(out == std::vector<size_t>{100});
}
