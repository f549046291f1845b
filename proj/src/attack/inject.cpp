#include "rcids/attack/inject.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "rcids/error.hpp"
#include "rcids/io_util.hpp"
#include "rcids/rng.hpp"

namespace rcids {
namespace {

void validate_spec(const IntrusionSpec& spec) {
  if (!(spec.select_fraction > 0 && spec.select_fraction < 1))
    fail(ErrorCode::ConfigError, "select_fraction must lie in (0, 1)");
  if (!(spec.tail_fraction > 0 && spec.tail_fraction < 1))
    fail(ErrorCode::ConfigError, "tail_fraction must lie in (0, 1)");
  if (!(spec.delta_lo < spec.delta_hi))
    fail(ErrorCode::ConfigError, "delta range must satisfy lo < hi");
  if (!(spec.delta_hi > 0)) fail(ErrorCode::ConfigError, "delta_hi must be positive");
  if (spec.delta_lo < 0) fail(ErrorCode::ConfigError, "delta_lo must be non-negative");
}

// floor(fraction * n) with a tiny absolute nudge so exact products like
// 0.30 * 1000 do not land one ulp under the integer they mean.
size_t fraction_count(double fraction, size_t n) {
  return static_cast<size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

// Per-position value randomness; stream b=1 keeps it apart from the
// selection shuffle (b=0) and the frame re-encoding jitter (b=2).
Rng value_rng(uint64_t seed, size_t index) {
  return Rng(mix_key(seed, index, 1, stream::kInject));
}

}  // namespace

IntrusionSpec abrupt_spec(uint64_t seed) {
  IntrusionSpec s;
  s.kind = IntrusionSpec::Kind::abrupt;
  s.delta_lo = 0.1;
  s.delta_hi = 0.9;
  s.seed = seed;
  return s;
}

IntrusionSpec directed_spec(uint64_t seed) {
  IntrusionSpec s;
  s.kind = IntrusionSpec::Kind::directed;
  s.delta_lo = 0.5;
  s.delta_hi = 1.0;
  s.seed = seed;
  return s;
}

InjectionResult inject_abrupt(const std::vector<double>& angles, const IntrusionSpec& spec) {
  if (spec.kind != IntrusionSpec::Kind::abrupt)
    fail(ErrorCode::ConfigError, "spec kind is not 'abrupt'");
  validate_spec(spec);
  if (angles.empty()) fail(ErrorCode::EmptyDataset, "no angles to manipulate");

  const size_t n = angles.size();
  const size_t count = fraction_count(spec.select_fraction, n);

  // Partial Fisher-Yates: the first `count` slots end up holding a uniform
  // sample without replacement.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng sel(mix_key(spec.seed, 0, 0, stream::kInject));
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + static_cast<size_t>(sel.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<size_t> chosen(order.begin(), order.begin() + static_cast<long>(count));
  std::sort(chosen.begin(), chosen.end());

  InjectionResult out;
  out.angles = angles;
  out.manipulations.reserve(count);
  for (size_t idx : chosen) {
    Rng r = value_rng(spec.seed, idx);
    const double delta = r.uniform(spec.delta_lo, spec.delta_hi);
    const double forged = angles[idx] + r.sign() * delta;
    out.angles[idx] = forged;
    out.manipulations.push_back({idx, angles[idx], forged, "offset"});
  }
  return out;
}

InjectionResult inject_directed(const std::vector<double>& angles, const IntrusionSpec& spec) {
  if (spec.kind != IntrusionSpec::Kind::directed)
    fail(ErrorCode::ConfigError, "spec kind is not 'directed'");
  validate_spec(spec);
  if (angles.empty()) fail(ErrorCode::EmptyDataset, "no angles to manipulate");

  const size_t n = angles.size();
  const size_t per_tail = fraction_count(spec.tail_fraction, n);

  std::vector<size_t> by_value(n);
  std::iota(by_value.begin(), by_value.end(), 0);

  std::set<size_t> selected;
  // Smallest tail: ascending by value, ties toward the lower index.
  std::sort(by_value.begin(), by_value.end(), [&](size_t a, size_t b) {
    return angles[a] != angles[b] ? angles[a] < angles[b] : a < b;
  });
  for (size_t i = 0; i < per_tail; ++i) selected.insert(by_value[i]);
  // Largest tail: descending by value, ties toward the lower index.
  std::sort(by_value.begin(), by_value.end(), [&](size_t a, size_t b) {
    return angles[a] != angles[b] ? angles[a] > angles[b] : a < b;
  });
  for (size_t i = 0; i < per_tail; ++i) selected.insert(by_value[i]);

  InjectionResult out;
  out.angles = angles;
  out.manipulations.reserve(selected.size());
  for (size_t idx : selected) {  // std::set iterates ascending
    const double a = angles[idx];
    double forged;
    std::string rule;
    if (std::abs(a) > spec.flip_threshold) {
      forged = -a;
      rule = "flip";
    } else {
      Rng r = value_rng(spec.seed, idx);
      forged = a + r.sign() * r.uniform(spec.delta_lo, spec.delta_hi);
      rule = "offset";
    }
    out.angles[idx] = forged;
    out.manipulations.push_back({idx, a, forged, rule});
  }
  return out;
}

void forge_dataset(const std::string& src_dir, const std::string& dst_dir,
                   const IntrusionSpec& spec, double frame_jitter_sigma,
                   const LoadOptions& opt) {
  Dataset ds = load_dataset(src_dir, opt);

  std::vector<double> angles;
  angles.reserve(ds.records.size());
  for (const Record& rec : ds.records) angles.push_back(rec.genuine_angle);

  InjectionResult result = spec.kind == IntrusionSpec::Kind::abrupt
                               ? inject_abrupt(angles, spec)
                               : inject_directed(angles, spec);

  // Map list positions to record ids for the audit.
  std::vector<ManipulationRow> audit = result.manipulations;
  std::set<size_t> forged_positions;
  for (ManipulationRow& m : audit) {
    forged_positions.insert(static_cast<size_t>(m.id));
    m.id = ds.records[static_cast<size_t>(m.id)].id;
  }

  ensure_directory(dst_dir);
  std::string index_csv = "id,image,timestamp_us,angle\n";
  std::string sensors_csv = "id,distance_front,water_level,speed\n";
  std::vector<CanFrame> frames;
  frames.reserve(ds.records.size() * ds.window);

  for (size_t i = 0; i < ds.records.size(); ++i) {
    const Record& rec = ds.records[i];
    const std::string image_abs =
        std::filesystem::absolute(rec.image_path).lexically_normal().string();
    index_csv += join_csv_line({std::to_string(rec.id), image_abs,
                                std::to_string(rec.timestamp_us),
                                format_double(rec.genuine_angle)});
    index_csv.push_back('\n');
    sensors_csv += join_csv_line({std::to_string(rec.id), format_double(rec.sensors.distance_front),
                                  format_double(rec.sensors.water_level),
                                  format_double(rec.sensors.speed)});
    sensors_csv.push_back('\n');

    if (!forged_positions.count(i)) {
      frames.insert(frames.end(), rec.frames.begin(), rec.frames.end());
      continue;
    }
    // Re-encode the whole window with the forged value. Fresh actuation-style
    // jitter keeps forged windows statistically shaped like genuine ones, so
    // a detector cannot shortcut on within-window variance.
    const double forged = result.angles[i];
    Rng jitter(mix_key(spec.seed, rec.id, 2, stream::kInject));
    for (const CanFrame& f : rec.frames) {
      CanFrame g = f;
      pack_signal(g, opt.signal, forged + frame_jitter_sigma * jitter.gaussian_truncated(2.9));
      frames.push_back(g);
    }
  }

  write_frame_log(dst_dir + "/frames.log", frames);
  write_file(dst_dir + "/index.csv", index_csv);
  write_file(dst_dir + "/sensors.csv", sensors_csv);
  write_manipulations(dst_dir + "/manipulations.csv", audit);
}

}  // namespace rcids
