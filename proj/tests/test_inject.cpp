// Tests for the forgery attacks: abrupt and directed angle manipulation over
// plain lists, plus the dataset-level re-encoding wrapper.
#include "doctest.h"

#include "rcids/attack/inject.hpp"
#include "rcids/data/dataset.hpp"
#include "rcids/error.hpp"
#include "rcids/io_util.hpp"
#include "rcids/rng.hpp"
#include "rcids/scene/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

using namespace rcids;

namespace {

std::string scratch_dir(const std::string& leaf) {
    namespace fs = std::filesystem;
    fs::path p = fs::temp_directory_path() / leaf;
    fs::remove_all(p);
    return p.string();
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

std::vector<double> random_angles(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> a(n);
    for (double& v : a) v = rng.uniform(-2.0, 2.0);
    return a;
}

}  // namespace

TEST_CASE("abrupt injection forges exactly 30% of 1000 records") {
    std::vector<double> angles = random_angles(1000, 1);
    InjectionResult r = inject_abrupt(angles, abrupt_spec(7));

    REQUIRE(r.manipulations.size() == 300);
    REQUIRE(r.angles.size() == angles.size());

    std::set<size_t> touched;
    bool plus = false, minus = false;
    for (const ManipulationRow& m : r.manipulations) {
        size_t idx = static_cast<size_t>(m.id);
        CHECK(touched.insert(idx).second);  // no index repeats
        CHECK(m.rule == "offset");
        CHECK(m.original == angles[idx]);
        CHECK(m.forged == r.angles[idx]);
        double delta = m.forged - m.original;
        CHECK(std::abs(delta) >= 0.1);
        CHECK(std::abs(delta) <= 0.9);
        (delta > 0 ? plus : minus) = true;
    }
    CHECK(plus);   // both signs occur over 300 draws
    CHECK(minus);

    // Audit indices come out ascending; untouched entries are bit-identical.
    CHECK(std::is_sorted(r.manipulations.begin(), r.manipulations.end(),
                         [](const ManipulationRow& a, const ManipulationRow& b) {
                             return a.id < b.id;
                         }));
    for (size_t i = 0; i < angles.size(); ++i) {
        if (!touched.count(i)) CHECK(r.angles[i] == angles[i]);
    }
}

TEST_CASE("abrupt injection is deterministic per seed") {
    std::vector<double> angles = random_angles(200, 2);
    InjectionResult a = inject_abrupt(angles, abrupt_spec(9));
    InjectionResult b = inject_abrupt(angles, abrupt_spec(9));
    CHECK(a.angles == b.angles);
    REQUIRE(a.manipulations.size() == b.manipulations.size());
    for (size_t i = 0; i < a.manipulations.size(); ++i) {
        CHECK(a.manipulations[i].id == b.manipulations[i].id);
        CHECK(a.manipulations[i].forged == b.manipulations[i].forged);
    }

    InjectionResult c = inject_abrupt(angles, abrupt_spec(10));
    CHECK(c.angles != a.angles);
}

TEST_CASE("abrupt selection counts floor correctly") {
    CHECK(inject_abrupt(random_angles(10, 3), abrupt_spec(1)).manipulations.size() == 3);
    CHECK(inject_abrupt(random_angles(999, 4), abrupt_spec(1)).manipulations.size() == 299);
    CHECK(inject_abrupt(random_angles(7, 5), abrupt_spec(1)).manipulations.size() == 2);
}

TEST_CASE("directed injection picks exactly the order-statistic tails") {
    std::vector<double> angles = random_angles(1000, 6);
    InjectionResult r = inject_directed(angles, directed_spec(11));
    REQUIRE(r.manipulations.size() == 300);

    // Brute-force recount: sort (value, index) both ways and take 150 each.
    std::vector<size_t> idx(angles.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::set<size_t> oracle;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return angles[a] != angles[b] ? angles[a] < angles[b] : a < b;
    });
    for (size_t i = 0; i < 150; ++i) oracle.insert(idx[i]);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
        return angles[a] != angles[b] ? angles[a] > angles[b] : a < b;
    });
    for (size_t i = 0; i < 150; ++i) oracle.insert(idx[i]);
    REQUIRE(oracle.size() == 300);

    std::set<size_t> picked;
    for (const ManipulationRow& m : r.manipulations) picked.insert(static_cast<size_t>(m.id));
    CHECK(picked == oracle);

    // Rule application: flip above the threshold, offset otherwise.
    for (const ManipulationRow& m : r.manipulations) {
        if (std::abs(m.original) > 0.3) {
            CHECK(m.rule == "flip");
            CHECK(m.forged == -m.original);
        } else {
            CHECK(m.rule == "offset");
            double delta = std::abs(m.forged - m.original);
            CHECK(delta >= 0.5);
            CHECK(delta <= 1.0);
        }
        CHECK(m.forged != m.original);
    }
}

TEST_CASE("directed rules on hand-picked angles") {
    // N=7, 15% per tail -> 1 + 1 selected: the max (0.5) and the min (0.1).
    std::vector<double> angles = {0.2, 0.5, 0.25, 0.3, 0.15, 0.1, 0.22};
    InjectionResult r = inject_directed(angles, directed_spec(13));
    REQUIRE(r.manipulations.size() == 2);

    const ManipulationRow& low = r.manipulations[0].original == 0.1 ? r.manipulations[0]
                                                                    : r.manipulations[1];
    const ManipulationRow& high = r.manipulations[0].original == 0.5 ? r.manipulations[0]
                                                                     : r.manipulations[1];
    CHECK(high.original == 0.5);
    CHECK(high.rule == "flip");
    CHECK(high.forged == -0.5);

    CHECK(low.original == 0.1);
    CHECK(low.rule == "offset");
    bool in_minus = low.forged >= -0.9 && low.forged <= -0.4;
    bool in_plus = low.forged >= 0.6 && low.forged <= 1.1;
    CHECK((in_minus || in_plus));

    // Exactly at the threshold: 0.3 is NOT flipped (strict inequality).
    std::vector<double> border = {0.3, 0.0, 0.1, 0.1, 0.1, 0.1, 0.1};
    InjectionResult rb = inject_directed(border, directed_spec(14));
    for (const ManipulationRow& m : rb.manipulations) {
        if (m.original == 0.3) CHECK(m.rule == "offset");
    }
}

TEST_CASE("directed ties break toward the lower index") {
    std::vector<double> angles = {1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.5};
    InjectionResult r = inject_directed(angles, directed_spec(15));  // 1 per tail
    REQUIRE(r.manipulations.size() == 2);
    CHECK(r.manipulations[0].id == 0);  // largest tie at indices 0,1,2
    CHECK(r.manipulations[1].id == 3);  // smallest tie at indices 3,4,5
}

TEST_CASE("injection rejects empty input and malformed specs") {
    CHECK(code_of([] { inject_abrupt({}, abrupt_spec(1)); }) == ErrorCode::EmptyDataset);
    CHECK(code_of([] { inject_directed({}, directed_spec(1)); }) == ErrorCode::EmptyDataset);

    IntrusionSpec bad = abrupt_spec(1);
    bad.select_fraction = 1.0;
    CHECK(code_of([&] { inject_abrupt(random_angles(5, 1), bad); }) == ErrorCode::ConfigError);

    bad = abrupt_spec(1);
    bad.delta_lo = 0.9;
    bad.delta_hi = 0.1;
    CHECK(code_of([&] { inject_abrupt(random_angles(5, 1), bad); }) == ErrorCode::ConfigError);

    CHECK(code_of([] { inject_directed(random_angles(5, 1), abrupt_spec(1)); }) ==
          ErrorCode::ConfigError);  // kind mismatch
}

TEST_CASE("forging a dataset re-encodes selected windows and labels them") {
    SynthConfig cfg;
    cfg.seed = 2024;
    cfg.count = 20;
    const std::string src = scratch_dir("rcids_forge_src");
    generate_dataset(cfg, src);

    IntrusionSpec spec = abrupt_spec(99);
    const std::string dst = scratch_dir("rcids_forge_dst");
    forge_dataset(src, dst, spec);

    Dataset clean = load_dataset(src);
    Dataset forged = load_dataset(dst);
    REQUIRE(forged.records.size() == clean.records.size());
    REQUIRE(forged.window == clean.window);

    std::vector<ManipulationRow> audit = read_manipulations(dst + "/manipulations.csv");
    REQUIRE(audit.size() == 6);  // floor(0.3 * 20)
    std::set<uint64_t> forged_ids;
    for (const ManipulationRow& m : audit) forged_ids.insert(m.id);

    for (size_t i = 0; i < forged.records.size(); ++i) {
        const Record& f = forged.records[i];
        const Record& c = clean.records[i];
        CHECK(f.id == c.id);
        CHECK(f.timestamp_us == c.timestamp_us);
        CHECK(f.genuine_angle == c.genuine_angle);  // index keeps ground truth
        CHECK(f.sensors.speed == c.sensors.speed);
        CHECK(file_exists(f.image_path));

        if (forged_ids.count(f.id)) {
            CHECK(f.label == 1);
            double target = 0;
            for (const ManipulationRow& m : audit)
                if (m.id == f.id) target = m.forged;
            for (size_t j = 0; j < f.angles.size(); ++j) {
                CHECK(std::abs(f.angles[j] - target) <= 3 * 0.01);
                // Timestamps survive re-encoding.
                CHECK(f.frames[j].timestamp_us == c.frames[j].timestamp_us);
            }
        } else {
            CHECK(f.label == 0);
            CHECK(f.frames == c.frames);  // untouched windows are bit-identical
        }
    }
}

TEST_CASE("forged outputs are byte-reproducible") {
    SynthConfig cfg;
    cfg.seed = 2025;
    cfg.count = 12;
    const std::string src = scratch_dir("rcids_forge_repro_src");
    generate_dataset(cfg, src);

    const std::string d1 = scratch_dir("rcids_forge_repro_1");
    const std::string d2 = scratch_dir("rcids_forge_repro_2");
    forge_dataset(src, d1, directed_spec(5));
    forge_dataset(src, d2, directed_spec(5));
    CHECK(read_file(d1 + "/frames.log") == read_file(d2 + "/frames.log"));
    CHECK(read_file(d1 + "/manipulations.csv") == read_file(d2 + "/manipulations.csv"));
    CHECK(read_file(d1 + "/index.csv") == read_file(d2 + "/index.csv"));

    // A different attack seed forges a different log.
    const std::string d3 = scratch_dir("rcids_forge_repro_3");
    forge_dataset(src, d3, directed_spec(6));
    CHECK(read_file(d1 + "/frames.log") != read_file(d3 + "/frames.log"));
}
