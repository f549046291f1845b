#include "rcids/scene/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"
#include "rcids/rng.hpp"

namespace rcids {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Pixel calibration of the renderer.
constexpr double kCurvePixels = 12000.0;  // horizon shift per 1/m of curvature
constexpr double kOffsetPixels = 40.0;    // near-field shift per meter of offset
constexpr int kBaseHorizon = 72;

uint8_t clamp_u8(double v) {
  return static_cast<uint8_t>(std::llround(std::clamp(v, 0.0, 255.0)));
}

void put(ImageBuffer& img, size_t x, size_t y, double r, double g, double b) {
  uint8_t* p = img.px(x, y);
  p[0] = clamp_u8(r);
  p[1] = clamp_u8(g);
  p[2] = clamp_u8(b);
}

// Smooth trajectory phases, drawn once per dataset seed.
struct TrajectoryPhases {
  double curve_a, curve_b, offset_a, offset_b;
  double dist, water, speed;
};

TrajectoryPhases phases_for(uint64_t seed) {
  Rng rng(mix_key(seed, 0, 0, stream::kScene));
  TrajectoryPhases p{};
  p.curve_a = rng.uniform(0.0, 2 * kPi);
  p.curve_b = rng.uniform(0.0, 2 * kPi);
  p.offset_a = rng.uniform(0.0, 2 * kPi);
  p.offset_b = rng.uniform(0.0, 2 * kPi);
  p.dist = rng.uniform(0.0, 2 * kPi);
  p.water = rng.uniform(0.0, 2 * kPi);
  p.speed = rng.uniform(0.0, 2 * kPi);
  return p;
}

}  // namespace

ImageBuffer render_scene(const SceneParams& p) {
  ImageBuffer img(kSceneWidth, kSceneHeight);
  const int horizon =
      std::clamp(kBaseHorizon + p.horizon_shift, 40, static_cast<int>(kSceneHeight) - 50);
  const double cx0 = (kSceneWidth - 1) / 2.0;  // 159.5, the vertical centerline

  for (size_t y = 0; y < kSceneHeight; ++y) {
    if (static_cast<int>(y) < horizon) {
      // Sky: brightens toward the horizon.
      double t = static_cast<double>(y) / std::max(horizon - 1, 1);
      put(img, 0, y, 120 + 70 * t, 170 + 40 * t, 230 + 5 * t);
      for (size_t x = 1; x < kSceneWidth; ++x) {
        std::copy(img.px(0, y), img.px(0, y) + 3, img.px(x, y));
      }
      continue;
    }

    // Ground row: u runs 0 at the horizon to 1 at the bottom edge.
    double u = static_cast<double>(y - horizon) / (kSceneHeight - 1 - horizon);
    double road_r = 95 - 40 * u, road_g = 95 - 37 * u, road_b = 98 - 38 * u;
    for (size_t x = 0; x < kSceneWidth; ++x) put(img, x, y, road_r, road_g, road_b);

    // Lane lines: the pair sits at center +/- half_gap. Curvature bends the
    // far field quadratically; lane offset shifts the near field linearly.
    double far = 1.0 - u;
    double center = cx0 + p.curvature * kCurvePixels * far * far - p.lane_offset * kOffsetPixels * u;
    double half_gap = 6.0 + 134.0 * u;
    double line_halfwidth = 1.0 + 3.0 * u;
    for (double side : {-1.0, 1.0}) {
      double lx = center + side * half_gap;
      long x_lo = std::lround(std::ceil(lx - line_halfwidth));
      long x_hi = std::lround(std::floor(lx + line_halfwidth));
      for (long x = std::max(x_lo, 0l);
           x <= std::min(x_hi, static_cast<long>(kSceneWidth) - 1); ++x) {
        put(img, static_cast<size_t>(x), y, 235, 233, 210);
      }
    }
  }

  if (p.night) {
    // Quarter luminance everywhere, then a headlight pool ahead of the car.
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      img.pixels[i] = static_cast<uint8_t>(img.pixels[i] / 4);
    }
    for (size_t y = horizon; y < kSceneHeight; ++y) {
      for (size_t x = 0; x < kSceneWidth; ++x) {
        double dx = (x - cx0) / 120.0;
        double dy = (kSceneHeight + 12.0 - y) / 70.0;
        double glow = 70.0 * std::exp(-(dx * dx + dy * dy));
        uint8_t* px = img.px(x, y);
        px[0] = clamp_u8(px[0] + glow);
        px[1] = clamp_u8(px[1] + glow);
        px[2] = clamp_u8(px[2] + glow * 0.8);
      }
    }
  }

  // Seeded sensor noise, applied last, symmetric so it barely moves the mean.
  Rng noise(mix_key(p.noise_seed, 0, 0, stream::kNoise));
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    double n = noise.uniform(-8.0, 8.0);
    img.pixels[i] = clamp_u8(img.pixels[i] + n);
  }
  return img;
}

double steering_policy(const SceneParams& p, const GroundTruthPolicy& policy) {
  double angle = policy.gain * p.curvature - 0.2 * p.lane_offset;
  return std::clamp(angle, -policy.clip, policy.clip);
}

SceneParams scene_at(const SynthConfig& cfg, size_t i) {
  TrajectoryPhases ph = phases_for(cfg.seed);
  SceneParams p;
  // Incommensurate periods: a long sweep plus a short wobble, with the
  // amplitudes chosen so the sum stays inside the declared ranges.
  p.curvature = 0.0095 * std::sin(2 * kPi * i / 197.0 + ph.curve_a) +
                0.0005 * std::sin(2 * kPi * i / 17.0 + ph.curve_b);
  p.lane_offset = 0.75 * std::sin(2 * kPi * i / 131.0 + ph.offset_a) +
                  0.15 * std::sin(2 * kPi * i / 23.0 + ph.offset_b);
  p.night = cfg.night;
  p.noise_seed = mix_key(cfg.seed, i, 0, stream::kNoise);
  p.horizon_shift = 0;
  return p;
}

SensorSnapshot sensors_at(const SynthConfig& cfg, size_t i) {
  TrajectoryPhases ph = phases_for(cfg.seed);
  SensorSnapshot s;
  s.distance_front = 50.0 + 42.0 * std::sin(2 * kPi * i / 89.0 + ph.dist);
  s.water_level = 0.30 + 0.22 * std::sin(2 * kPi * i / 211.0 + ph.water);
  s.speed = 80.0 + 45.0 * std::sin(2 * kPi * i / 157.0 + ph.speed);
  return s;
}

double genuine_angle_at(const SynthConfig& cfg, size_t i) {
  return steering_policy(scene_at(cfg, i), cfg.policy);
}

uint64_t record_timestamp_us(const SynthConfig& cfg, size_t i) {
  uint64_t window_start = cfg.start_time_us + i * cfg.image_period_us;
  // Center of the W frame instants at window_start + j*frame_period.
  return window_start + (cfg.window - 1) * cfg.frame_period_us / 2;
}

void generate_dataset(const SynthConfig& cfg, const std::string& dir) {
  if (cfg.count < 1) fail(ErrorCode::ConfigError, "record count must be >= 1");
  if (cfg.window < 1) fail(ErrorCode::ConfigError, "window must be >= 1");
  ensure_directory(dir);
  ensure_directory(dir + "/images");

  std::string index_csv = "id,image,timestamp_us,angle\n";
  std::string sensors_csv = "id,distance_front,water_level,speed\n";
  std::vector<CanFrame> frames;
  frames.reserve(cfg.count * cfg.window);

  for (size_t i = 0; i < cfg.count; ++i) {
    SceneParams scene = scene_at(cfg, i);
    double angle = steering_policy(scene, cfg.policy);

    char name[32];
    std::snprintf(name, sizeof name, "images/%06zu.png", i);
    write_png(dir + "/" + name, render_scene(scene));

    index_csv += join_csv_line({std::to_string(i), name,
                                std::to_string(record_timestamp_us(cfg, i)),
                                format_double(angle)});
    index_csv.push_back('\n');

    SensorSnapshot sn = sensors_at(cfg, i);
    sensors_csv += join_csv_line({std::to_string(i), format_double(sn.distance_front),
                                  format_double(sn.water_level), format_double(sn.speed)});
    sensors_csv.push_back('\n');

    // The window's frames: policy output plus genuine actuation jitter. The
    // jitter is truncated at 2.9 sigma so the decoded angle — which also
    // carries up to half a count of quantization — stays within 3 sigma.
    Rng jitter(mix_key(cfg.seed, i, 0, stream::kJitter));
    for (size_t j = 0; j < cfg.window; ++j) {
      CanFrame f;
      f.timestamp_us = cfg.start_time_us + i * cfg.image_period_us + j * cfg.frame_period_us;
      f.id = cfg.frame_id;
      f.dlc = cfg.frame_dlc;
      double measured = angle + cfg.jitter_sigma * jitter.gaussian_truncated(2.9);
      pack_signal(f, cfg.signal, measured);
      frames.push_back(f);
    }
  }

  write_frame_log(dir + "/frames.log", frames);
  write_file(dir + "/index.csv", index_csv);
  write_file(dir + "/sensors.csv", sensors_csv);
}

}  // namespace rcids
