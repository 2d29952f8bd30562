#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mocpd {

// One timestamped scalar observation. Indices within a stream start at 0
// and increase by 1; one index unit corresponds to one 30-minute interval
// for fuel-variance data.
struct SeriesPoint {
  std::size_t index = 0;
  double value = 0.0;
};

// Contiguous slice of `w` consecutive cleaned values, the unit compared
// against the memory.
struct Window {
  std::size_t start = 0;
  std::vector<double> values;

  friend bool operator==(const Window& a, const Window& b) {
    return a.start == b.start && a.values == b.values;
  }
};

// Emitted change event: the stream index at which the decision was made,
// the dissimilarity score and the threshold it exceeded.
struct Detection {
  std::size_t index = 0;
  double score = 0.0;
  double threshold_at = 0.0;
};

// The stored distribution: at most m representative windows with their
// cached centroid, the active threshold and the count of windows offered
// since the last reset (drives reservoir sampling).
struct Memory {
  std::vector<Window> samples;
  std::vector<double> centroid;
  double threshold = 0.0;
  std::size_t seen_count = 0;

  void reset() {
    samples.clear();
    centroid.clear();
    threshold = 0.0;
    seen_count = 0;
  }
};

enum class MeasureKind { Mean, Mmd, Vae };
enum class UpdateScheme { Random, Reservoir, Prototype };

const char* to_string(MeasureKind k);
const char* to_string(UpdateScheme s);
bool parse_measure(const std::string& text, MeasureKind& out);
bool parse_scheme(const std::string& text, UpdateScheme& out);

struct DetectorConfig {
  std::size_t window = 100;     // w: window size in samples
  std::size_t max_memory = 75;  // m: memory capacity in windows
  std::size_t min_memory = 50;  // n: windows gathered before detection starts
  std::size_t buffer = 15;      // b: buffered windows per update cycle
  std::size_t stride = 10;      // r: raw samples between scored windows
  double alpha = 4.0;           // threshold scale
  double quantile_p = 0.975;    // quantile probability for the threshold
  MeasureKind measure = MeasureKind::Mmd;
  double mmd_bandwidth = 0.0;   // 0 = median heuristic, refreshed per update
  UpdateScheme scheme = UpdateScheme::Random;
  std::uint64_t seed = 1;
  std::size_t tolerance = 480;  // evaluation tolerance in samples (10 days)
  bool ssa = true;              // online SSA outlier filtering

  static DetectorConfig defaults() { return DetectorConfig{}; }

  // Settings for the short-segment synthetic benchmarks: small memory,
  // tight stride and a lower threshold scale so collection fits well
  // inside a 500-sample segment.
  static DetectorConfig benchmark(std::size_t w = 25, std::size_t m = 10);

  std::string to_json() const;
  static DetectorConfig from_json(const std::string& text);
};

// One message per violated invariant; empty result means the config is valid.
std::vector<std::string> validate_config(const DetectorConfig& cfg);

}  // namespace mocpd
