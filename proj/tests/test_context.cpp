// Tests for image preprocessing, CNN feature extraction, and the assembly of
// the road-context vector from features plus normalized sensors.
#include "doctest.h"

#include "rcids/context/extractor.hpp"
#include "rcids/error.hpp"
#include "rcids/image/image.hpp"
#include "rcids/nn/checkpoint.hpp"
#include "rcids/nn/network.hpp"
#include "rcids/scene/synth.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <vector>

using namespace rcids;

namespace {

Checkpoint untrained_cnn(uint64_t seed) {
    Checkpoint c;
    c.model_kind = kModelCnn;
    c.meta.seed = seed;
    c.net = make_context_cnn<float>(seed);
    return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ConfigError;
}

}  // namespace

TEST_CASE("preprocessing an all-zero image with zero means gives all zeros") {
    ImageBuffer img(100, 100);  // zero-initialized pixels
    const float mean[3] = {0, 0, 0};
    Tensor t = preprocess_image(img, mean);
    REQUIRE(t.shape == std::vector<size_t>{100, 100, 3});
    for (float v : t.data) CHECK(v == 0.0f);
}

TEST_CASE("preprocessing uniform gray subtracts the per-channel mean") {
    ImageBuffer img(200, 200);
    for (auto& b : img.pixels) b = 128;
    const float mean[3] = {0.1f, 0.2f, 0.3f};
    Tensor t = preprocess_image(img, mean);
    REQUIRE(t.shape == std::vector<size_t>{100, 100, 3});
    for (size_t i = 0; i < t.data.size(); ++i) {
        CHECK(t.data[i] == 128.0f / 255.0f - mean[i % 3]);
    }
}

TEST_CASE("preprocessing a wide scene lands in [-1, 1]") {
    SceneParams p;
    p.curvature = 0.006;
    p.lane_offset = 0.5;
    p.noise_seed = 17;
    ImageBuffer img = render_scene(p);  // 320x160
    const float mean[3] = {0.4f, 0.45f, 0.5f};
    Tensor t = preprocess_image(img, mean);
    REQUIRE(t.shape == std::vector<size_t>{100, 100, 3});
    for (float v : t.data) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("images under 100 pixels on either side are rejected") {
    const float mean[3] = {0, 0, 0};
    CHECK(code_of([&] { preprocess_image(ImageBuffer(99, 200), mean); }) ==
          ErrorCode::ImageTooSmall);
    CHECK(code_of([&] { preprocess_image(ImageBuffer(200, 99), mean); }) ==
          ErrorCode::ImageTooSmall);
    CHECK_NOTHROW(preprocess_image(ImageBuffer(100, 100), mean));
}

TEST_CASE("feature extraction returns exactly 100 deterministic values") {
    Checkpoint cnn = untrained_cnn(5);
    SceneParams p;
    p.noise_seed = 23;
    Tensor pre = preprocess_image(render_scene(p), cnn.meta.channel_mean);

    Tensor f1 = extract_features(pre, cnn);
    Tensor f2 = extract_features(pre, cnn);
    REQUIRE(f1.shape == std::vector<size_t>{100});
    REQUIRE(f1.data.size() == 100);
    CHECK(std::memcmp(f1.data.data(), f2.data.data(), sizeof(float) * 100) == 0);
    for (float v : f1.data) CHECK(std::isfinite(v));
}

TEST_CASE("straight and bent roads map to different feature vectors") {
    Checkpoint cnn = untrained_cnn(6);
    SceneParams straight, bent;
    straight.noise_seed = bent.noise_seed = 29;
    bent.curvature = 0.009;
    bent.lane_offset = -0.6;

    Tensor fs = extract_features(preprocess_image(render_scene(straight), cnn.meta.channel_mean), cnn);
    Tensor fb = extract_features(preprocess_image(render_scene(bent), cnn.meta.channel_mean), cnn);
    double dist = 0;
    for (size_t i = 0; i < 100; ++i) {
        double d = static_cast<double>(fs.data[i]) - fb.data[i];
        dist += d * d;
    }
    CHECK(std::sqrt(dist) > 0.0);
}

TEST_CASE("extraction rejects wrong checkpoints and wrong tensor shapes") {
    Tensor good({100, 100, 3});

    Checkpoint classifier;
    classifier.model_kind = kModelClassifier;
    classifier.net = make_window_classifier<float>(111, 64, 1);
    CHECK(code_of([&] { extract_features(good, classifier); }) == ErrorCode::CheckpointMismatch);

    // Right kind tag, wrong network inside.
    Checkpoint mislabeled;
    mislabeled.model_kind = kModelCnn;
    mislabeled.net = make_window_classifier<float>(111, 64, 2);
    CHECK(code_of([&] { extract_features(good, mislabeled); }) == ErrorCode::CheckpointMismatch);

    Checkpoint cnn = untrained_cnn(7);
    Tensor flat({100 * 100 * 3});
    CHECK(code_of([&] { extract_features(flat, cnn); }) == ErrorCode::ShapeMismatch);
}

TEST_CASE("context vector is features then sensors in fixed order") {
    Tensor features({100});  // all zeros
    SensorSnapshot s;
    s.distance_front = 100.0;  // at range max
    s.water_level = 0.0;
    s.speed = 0.0;
    SensorRanges ranges;

    std::vector<float> ctx = build_context_vector(features, s, ranges);
    REQUIRE(ctx.size() == 103);
    for (size_t i = 0; i < 100; ++i) CHECK(ctx[i] == 0.0f);
    CHECK(ctx[100] == 1.0f);
    CHECK(ctx[101] == 0.0f);
    CHECK(ctx[102] == 0.0f);

    s.distance_front = 25.0;
    s.water_level = 0.5;
    s.speed = 120.0;
    ctx = build_context_vector(features, s, ranges);
    CHECK(ctx[100] == 0.25f);
    CHECK(ctx[101] == 0.5f);
    CHECK(ctx[102] == 0.75f);
}

TEST_CASE("an empty sensor list returns the features unchanged") {
    Tensor features({100});
    for (size_t i = 0; i < 100; ++i) features.data[i] = 0.01f * static_cast<float>(i);
    std::vector<float> out = append_normalized_sensors(features, {});
    CHECK(out == features.data);
}

TEST_CASE("out-of-range or non-finite sensors are rejected") {
    Tensor features({100});
    SensorRanges ranges;
    SensorSnapshot s;

    s.speed = 200.0;  // above 160
    CHECK(code_of([&] { build_context_vector(features, s, ranges); }) ==
          ErrorCode::SensorOutOfRange);

    s.speed = 0.0;
    s.distance_front = -1.0;
    CHECK(code_of([&] { build_context_vector(features, s, ranges); }) ==
          ErrorCode::SensorOutOfRange);

    s.distance_front = 0.0;
    s.water_level = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of([&] { build_context_vector(features, s, ranges); }) ==
          ErrorCode::SensorOutOfRange);

    // Exactly at the bounds is fine.
    s.water_level = 1.0;
    s.speed = 160.0;
    s.distance_front = 0.0;
    CHECK_NOTHROW(build_context_vector(features, s, ranges));
}

TEST_CASE("full stage-1 pass composes preprocessing, CNN, and sensors") {
    Checkpoint cnn = untrained_cnn(8);
    cnn.meta.channel_mean[0] = 0.35f;
    cnn.meta.channel_mean[1] = 0.40f;
    cnn.meta.channel_mean[2] = 0.45f;

    SynthConfig cfg;
    cfg.seed = 99;
    ImageBuffer img = render_scene(scene_at(cfg, 0));
    SensorSnapshot s = sensors_at(cfg, 0);

    std::vector<float> ctx = road_context(img, s, cnn, cfg.sensor_ranges);
    REQUIRE(ctx.size() == 103);
    for (float v : ctx) CHECK(std::isfinite(v));

    // Matches the manual composition of the three stages.
    Tensor pre = preprocess_image(img, cnn.meta.channel_mean);
    std::vector<float> manual =
        build_context_vector(extract_features(pre, cnn), s, cfg.sensor_ranges);
    CHECK(ctx == manual);
}
