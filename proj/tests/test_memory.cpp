#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "mocpd/memory_ops.hpp"
#include "test_util.hpp"

using namespace mocpd;

namespace {

std::vector<Window> make_windows(const std::vector<std::vector<double>>& rows,
                                 std::size_t start0 = 0) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({start0 + i, rows[i]});
  return out;
}

std::vector<Window> random_windows(std::size_t count, std::size_t len, double mean, Rng& rng,
                                   std::size_t start0 = 0) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> row(len);
    for (double& x : row) x = rng.normal(mean, 1.0);
    out.push_back({start0 + i, row});
  }
  return out;
}

double window_mean(const Window& w) {
  double s = 0.0;
  for (double v : w.values) s += v;
  return s / static_cast<double>(w.values.size());
}

}  // namespace

TEST_CASE("centroid is the element-wise mean") {
  const auto c = centroid(make_windows({{1, 2}, {3, 4}}));
  CHECK(c == std::vector<double>{2, 3});

  const auto single = centroid(make_windows({{7, 8, 9}}));
  CHECK(single == std::vector<double>{7, 8, 9});

  CHECK_THROWS(centroid({}));
  CHECK_THROWS(centroid(make_windows({{1, 2}, {1}})));
}

TEST_CASE("centroid matches an independent accumulation order") {
  Rng rng(41);
  const auto windows = random_windows(75, 20, 0.0, rng);
  const auto fast = centroid(windows);
  // Reference sums per position over reversed window order.
  for (std::size_t j = 0; j < 20; ++j) {
    double s = 0.0;
    for (std::size_t i = windows.size(); i-- > 0;) s += windows[i].values[j];
    CHECK(std::abs(fast[j] - s / 75.0) < 1e-12);
  }
}

TEST_CASE("threshold is alpha times the interpolated quantile") {
  Measure mean_measure;
  mean_measure.kind = MeasureKind::Mean;

  // All samples at the same distance: quantile collapses to that distance.
  const auto windows = make_windows({{3, 3}, {3, 3}, {3, 3}});
  const std::vector<double> center{0, 0};  // every score is 9
  CHECK(compute_threshold(windows, center, mean_measure, 4.0, 0.975) == doctest::Approx(36.0));
  CHECK(compute_threshold(windows, center, mean_measure, 8.0, 0.975) == doctest::Approx(72.0));

  CHECK_THROWS(compute_threshold(make_windows({{1, 1}}), center, mean_measure, 4.0, 0.975));
}

TEST_CASE("quantile interpolates between order statistics") {
  std::vector<double> s;
  for (int i = 1; i <= 40; ++i) s.push_back(i);
  // position 39 * 0.975 = 38.025 -> 39 + 0.025
  CHECK(quantile_linear(s, 0.975) == doctest::Approx(39.025).epsilon(1e-12));
  CHECK(4.0 * quantile_linear(s, 0.975) == doctest::Approx(156.1).epsilon(1e-12));
  CHECK(quantile_linear({5.0}, 0.5) == 5.0);
  CHECK_THROWS(quantile_linear({}, 0.5));
}

TEST_CASE("random update keeps the union when under capacity") {
  Rng rng(42);
  const auto memory = random_windows(10, 4, 0.0, rng, 0);
  const auto buffer = random_windows(5, 4, 0.0, rng, 100);
  const auto merged = update_random(memory, buffer, 75, rng);
  CHECK(merged.size() == 15);
}

TEST_CASE("random update draws an m-subset of the union") {
  Rng rng(43);
  const auto memory = random_windows(60, 4, 0.0, rng, 0);
  const auto buffer = random_windows(30, 4, 0.0, rng, 1000);
  const auto merged = update_random(memory, buffer, 75, rng);
  REQUIRE(merged.size() == 75);

  std::set<std::size_t> union_starts;
  for (const auto& w : memory) union_starts.insert(w.start);
  for (const auto& w : buffer) union_starts.insert(w.start);
  std::set<std::size_t> seen;
  for (const auto& w : merged) {
    CHECK(union_starts.count(w.start) == 1);
    CHECK(seen.insert(w.start).second);  // no duplicates
  }
}

TEST_CASE("random update selects uniformly") {
  const std::size_t union_size = 10, m = 5, trials = 20000;
  const auto memory = make_windows({{0.0}, {1.0}, {2.0}, {3.0}, {4.0}, {5.0}});
  const auto buffer = make_windows({{6.0}, {7.0}, {8.0}, {9.0}}, 6);

  std::vector<double> counts(union_size, 0.0);
  Rng rng(44);
  for (std::size_t t = 0; t < trials; ++t) {
    for (const auto& w : update_random(memory, buffer, m, rng)) counts[w.start] += 1.0;
  }
  const double expected = static_cast<double>(trials) * m / union_size;
  double chi2 = 0.0;
  for (double c : counts) {
    CHECK(std::abs(c / trials - 0.5) < 0.02);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  CHECK(testutil::chi2_sf(chi2, union_size - 1) > 0.01);
}

TEST_CASE("reservoir keeps the first m and accepts with m over i") {
  Rng rng(45);
  Memory mem;
  for (std::size_t i = 0; i < 10; ++i) {
    update_reservoir(mem, {i, {static_cast<double>(i)}}, 10, rng);
    CHECK(mem.samples.size() == i + 1);  // everything accepted while short
  }
  CHECK(mem.seen_count == 10);
  update_reservoir(mem, {10, {10.0}}, 10, rng);
  CHECK(mem.samples.size() == 10);
  CHECK(mem.seen_count == 11);
}

TEST_CASE("reservoir retention approaches m over stream length") {
  // Smaller companion to the acceptance run.
  const std::size_t stream = 200, m = 10, trials = 4000;
  std::vector<double> counts(stream, 0.0);
  Rng rng(46);
  for (std::size_t t = 0; t < trials; ++t) {
    Memory mem;
    for (std::size_t i = 0; i < stream; ++i)
      update_reservoir(mem, {i, {static_cast<double>(i)}}, m, rng);
    for (const auto& w : mem.samples) counts[w.start] += 1.0;
  }
  const double expected = static_cast<double>(m) / stream;  // 0.05
  for (double c : counts) CHECK(std::abs(c / trials - expected) < 0.02);
}

TEST_CASE("prototype keeps the windows closest to the union mean") {
  const auto memory = make_windows({{0.0}, {1.0}});
  const auto buffer = make_windows({{10.0}}, 2);
  const auto kept = update_prototype(memory, buffer, 2);
  REQUIRE(kept.size() == 2);
  // mean 11/3: distances 3.67, 2.67, 6.33 -> keep {0} and {1}
  std::set<double> values;
  for (const auto& w : kept) values.insert(w.values[0]);
  CHECK(values == std::set<double>{0.0, 1.0});
}

TEST_CASE("prototype under capacity and tie cases") {
  const auto memory = make_windows({{2.0}, {2.0}, {2.0}});
  CHECK(update_prototype(memory, {}, 5).size() == 3);
  const auto tied = update_prototype(memory, make_windows({{2.0}, {2.0}}, 3), 2);
  REQUIRE(tied.size() == 2);
  // ties break toward earlier start indices
  CHECK(tied[0].start == 0);
  CHECK(tied[1].start == 1);
}

TEST_CASE("update phase installs the threshold computed on pre-update memory") {
  Rng data_rng(47);
  DetectorConfig cfg;
  cfg.max_memory = 20;
  cfg.scheme = UpdateScheme::Random;
  Measure measure;
  measure.kind = MeasureKind::Mean;

  Memory mem;
  mem.samples = random_windows(20, 6, 0.0, data_rng);
  mem.centroid = centroid(mem.samples);
  mem.seen_count = 20;
  const auto buffer = random_windows(8, 6, 0.5, data_rng, 500);

  UpdateEvent seen;
  bool called = false;
  UpdateObserver observer = [&](const UpdateEvent& ev) {
    seen = ev;
    called = true;
  };

  const std::vector<Window> pre_samples = mem.samples;
  const std::vector<double> pre_centroid = mem.centroid;
  Rng rng(48);
  run_update_phase(mem, buffer, cfg, measure, rng, &observer);

  REQUIRE(called);
  CHECK(seen.pre_samples == pre_samples);
  const double recomputed =
      compute_threshold(pre_samples, pre_centroid, measure, cfg.alpha, cfg.quantile_p);
  CHECK(mem.threshold == recomputed);  // exact, same code path and inputs
  CHECK(seen.installed_threshold == recomputed);
}

TEST_CASE("update phase leaves memory consistent for every scheme") {
  for (UpdateScheme scheme :
       {UpdateScheme::Random, UpdateScheme::Reservoir, UpdateScheme::Prototype}) {
    CAPTURE(static_cast<int>(scheme));
    Rng data_rng(49);
    DetectorConfig cfg;
    cfg.max_memory = 15;
    cfg.scheme = scheme;
    Measure measure;
    measure.kind = MeasureKind::Mmd;
    measure.bandwidth = 1.0;

    Memory mem;
    mem.samples = random_windows(15, 5, 0.0, data_rng);
    mem.centroid = centroid(mem.samples);
    mem.seen_count = 15;

    Rng rng(50);
    measure.refresh_bandwidth(mem.samples, rng);
    const double pre_bandwidth = measure.bandwidth;
    const auto buffer = random_windows(6, 5, 3.0, data_rng, 800);
    run_update_phase(mem, buffer, cfg, measure, rng);

    CHECK(mem.samples.size() <= cfg.max_memory);
    const auto expect = centroid(mem.samples);
    for (std::size_t j = 0; j < expect.size(); ++j) CHECK(mem.centroid[j] == expect[j]);
    // distribution shifted, so the refreshed bandwidth should move
    CHECK(measure.bandwidth != pre_bandwidth);
  }
}

TEST_CASE("random update centroid lands between old centroid and drifted buffer") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    CAPTURE(seed);
    Rng data_rng(seed);
    // 25-subset of 20 old + 10 new must contain some of each.
    DetectorConfig cfg;
    cfg.max_memory = 25;
    cfg.scheme = UpdateScheme::Random;
    Measure measure;
    measure.kind = MeasureKind::Mean;

    Memory mem;
    mem.samples = random_windows(20, 6, 0.0, data_rng);
    mem.centroid = centroid(mem.samples);
    mem.seen_count = 20;
    const auto buffer = random_windows(10, 6, 1.0, data_rng, 900);

    double old_mean = window_mean({0, mem.centroid});
    double buffer_mean = 0.0;
    for (const auto& w : buffer) buffer_mean += window_mean(w);
    buffer_mean /= static_cast<double>(buffer.size());

    Rng rng(seed + 1000);
    run_update_phase(mem, buffer, cfg, measure, rng);
    const double new_mean = window_mean({0, mem.centroid});

    const double lo = std::min(old_mean, buffer_mean);
    const double hi = std::max(old_mean, buffer_mean);
    CHECK(new_mean > lo);
    CHECK(new_mean < hi);
  }
}

TEST_CASE("stationary buffer keeps the centroid inside the union's span") {
  Rng data_rng(51);
  DetectorConfig cfg;
  cfg.max_memory = 20;
  cfg.scheme = UpdateScheme::Random;
  Measure measure;
  measure.kind = MeasureKind::Mean;

  Memory mem;
  mem.samples = random_windows(20, 6, 0.0, data_rng);
  mem.centroid = centroid(mem.samples);
  mem.seen_count = 20;
  const auto buffer = random_windows(8, 6, 0.0, data_rng, 700);

  double lo = 1e300, hi = -1e300;
  for (const auto& w : mem.samples) {
    lo = std::min(lo, window_mean(w));
    hi = std::max(hi, window_mean(w));
  }
  for (const auto& w : buffer) {
    lo = std::min(lo, window_mean(w));
    hi = std::max(hi, window_mean(w));
  }

  Rng rng(52);
  run_update_phase(mem, buffer, cfg, measure, rng);
  const double new_mean = window_mean({0, mem.centroid});
  CHECK(new_mean >= lo);
  CHECK(new_mean <= hi);
  CHECK(mem.threshold > 0.0);
}
