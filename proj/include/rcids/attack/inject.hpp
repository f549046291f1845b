#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcids/data/dataset.hpp"

namespace rcids {

// Forgery attack configuration. Two kinds:
//   abrupt   — forge a random fraction of records at random times,
//   directed — forge the records whose angles sit in the two order-statistic
//              tails (extreme angles are the contextually critical moments).
struct IntrusionSpec {
  enum class Kind { abrupt, directed };
  Kind kind = Kind::abrupt;
  double select_fraction = 0.30;  // abrupt: share of records forged
  double tail_fraction = 0.15;    // directed: share forged per tail
  double delta_lo = 0.1;          // additive offset magnitude range
  double delta_hi = 0.9;
  double flip_threshold = 0.3;    // directed: |angle| above this flips sign
  uint64_t seed = 1;
};

// Ready-made specs with the standard delta ranges for each kind.
IntrusionSpec abrupt_spec(uint64_t seed);
IntrusionSpec directed_spec(uint64_t seed);  // deltas in [0.5, 1.0]

// Outcome of injecting over a plain angle list: the forged copy plus an audit
// row per manipulated position (ManipulationRow::id holds the list index).
struct InjectionResult {
  std::vector<double> angles;
  std::vector<ManipulationRow> manipulations;  // ascending by index
};

// Picks exactly floor(select_fraction*N) positions uniformly without
// replacement (seeded), then adds +/-delta to each, delta uniform in
// [delta_lo, delta_hi] and the sign a fair coin. Unselected positions are
// returned bit-identical. Randomness is keyed per (seed, index), so the
// outcome depends only on (angles, spec). EMPTY_DATASET when N == 0;
// CONFIG_ERROR when the spec's fractions or ranges are malformed.
InjectionResult inject_abrupt(const std::vector<double>& angles, const IntrusionSpec& spec);

// Selects the floor(tail_fraction*N) largest and floor(tail_fraction*N)
// smallest angles (ties broken toward the lower index). Each selected angle a
// becomes -a when |a| > flip_threshold ("flip"), and a +/- delta with delta
// uniform in [delta_lo, delta_hi] otherwise ("offset"). On degenerate data
// where the two tails intersect, the union is forged once per position.
InjectionResult inject_directed(const std::vector<double>& angles, const IntrusionSpec& spec);

// Dataset-level wrapper: loads src_dir, forges the per-record genuine angles,
// and writes dst_dir with
//   - index.csv / sensors.csv: original rows (images referenced by absolute
//     path into src_dir, so the corpus is not copied),
//   - frames.log: selected records get their whole window re-encoded to carry
//     the forged angle plus fresh actuation-style jitter (sigma
//     frame_jitter_sigma, truncated at 2.9 sigma); unselected records keep
//     byte-identical frames,
//   - manipulations.csv: the audit, with indices mapped to record ids.
// Reproducible: (src contents, spec, sigma) fully determine dst bytes.
void forge_dataset(const std::string& src_dir, const std::string& dst_dir,
                   const IntrusionSpec& spec, double frame_jitter_sigma = 0.01,
                   const LoadOptions& opt = {});

}  // namespace rcids
