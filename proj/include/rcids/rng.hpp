#pragma once

#include <cmath>
#include <cstdint>

namespace rcids {

// splitmix64 step: the whole toolkit draws randomness from this one
// generator so results are reproducible across platforms and thread counts.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Collapses (seed, counters, stream tag) into an independent stream seed.
// Per-record work keys its own stream off the record index, so generation
// order (or parallel generation) cannot change what any record gets.
inline uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = seed;
  (void)splitmix64(s);
  s ^= 0x517cc1b727220a95ull * (a + 1);
  (void)splitmix64(s);
  s ^= 0x2545f4914f6cdd1dull * (b + 1);
  (void)splitmix64(s);
  s ^= 0x9e3779b97f4a7c15ull * (c + 1);
  return splitmix64(s);
}

// Stream tags: fixed constants, one per purpose, so independent subsystems
// never collide even when they share the top-level seed.
namespace stream {
constexpr uint64_t kScene = 0x5343454eull;    // scene geometry
constexpr uint64_t kNoise = 0x4e4f4953ull;    // pixel noise
constexpr uint64_t kJitter = 0x4a495454ull;   // measurement jitter on frames
constexpr uint64_t kInject = 0x494e4a54ull;   // intrusion injection
constexpr uint64_t kSplit = 0x53504c54ull;    // train/test split
constexpr uint64_t kInit = 0x494e4954ull;     // weight init
constexpr uint64_t kShuffle = 0x53484651ull;  // epoch shuffles
constexpr uint64_t kDropout = 0x44524f50ull;  // dropout masks
constexpr uint64_t kBalance = 0x42414c41ull;  // class-balance oversampling
constexpr uint64_t kSensor = 0x53454e53ull;   // sensor traces
}  // namespace stream

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0,1): top 53 bits, the usual double mantissa construction.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0. Plain modulo is fine here:
  // n is always tiny against 2^64 so the bias is unobservable.
  uint64_t below(uint64_t n) { return next_u64() % n; }

  // Standard normal via Box-Muller; one draw per call, second value discarded
  // to keep the stream position independent of call parity.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;  // avoid log(0)
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  double gaussian(double mean, double sigma) { return mean + sigma * gaussian(); }

  // Standard normal conditioned on |z| <= bound, by resampling. Used where a
  // hard bound on jitter is part of the data contract.
  double gaussian_truncated(double bound) {
    for (;;) {
      double g = gaussian();
      if (std::abs(g) <= bound) return g;
    }
  }

  // Random sign: +1 or -1 with equal probability.
  double sign() { return (next_u64() & 1) ? 1.0 : -1.0; }

 private:
  uint64_t state_;
};

}  // namespace rcids
