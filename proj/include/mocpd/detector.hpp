#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "mocpd/dissimilarity.hpp"
#include "mocpd/memory_ops.hpp"
#include "mocpd/rng.hpp"
#include "mocpd/ssa.hpp"
#include "mocpd/types.hpp"

namespace mocpd {

enum class Phase { Initialising, Detecting, Collecting };

// One scored window: the stream index the decision was made at, its
// dissimilarity score and the threshold in force at that instant.
struct ScorePoint {
  std::size_t index = 0;
  double score = 0.0;
  double threshold = 0.0;
};

struct StreamResult {
  std::vector<Detection> detections;
  std::vector<ScorePoint> trace;
  std::vector<double> decision_times_ms;
};

// The streaming change-point detector. Points are fed one at a time in
// index order; every stride-th index with a full window is processed:
// gathered into memory while initialising or collecting, scored against
// the memory centroid while detecting. A score above the threshold emits
// a Detection, wipes memory and buffer and enters the collection phase;
// a score at or below it buffers the window, and a full buffer triggers
// the update phase.
class MocpdDetector {
 public:
  explicit MocpdDetector(const DetectorConfig& cfg);

  MocpdDetector(const MocpdDetector&) = delete;
  MocpdDetector& operator=(const MocpdDetector&) = delete;

  // Feeds one point; pt.index must equal the cursor. Returns the detection
  // emitted at this index, if any.
  std::optional<Detection> step(const SeriesPoint& pt);

  Phase phase() const { return phase_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t collect_remaining() const;
  const Memory& memory() const { return memory_; }
  std::size_t buffer_size() const { return buffer_.size(); }
  double current_threshold() const { return memory_.threshold; }
  double current_bandwidth() const { return measure_.bandwidth; }
  const DetectorConfig& config() const { return cfg_; }

  const std::vector<Detection>& detections() const { return detections_; }
  const std::vector<ScorePoint>& trace() const { return trace_; }
  const std::vector<double>& decision_times_ms() const { return decision_times_; }

  // Observer invoked at every update phase with the pre-update memory and
  // the threshold installed from it; used to verify the ordering contract.
  void set_update_observer(UpdateObserver observer) { observer_ = std::move(observer); }

 private:
  DetectorConfig cfg_;
  Rng rng_;
  Phase phase_ = Phase::Initialising;
  Memory memory_;
  std::vector<Window> buffer_;
  std::deque<double> pending_;  // last <= w cleaned values
  std::size_t cursor_ = 0;
  std::optional<SsaFilter> filter_;
  Measure measure_;
  VaeModel vae_;
  std::vector<Detection> detections_;
  std::vector<ScorePoint> trace_;
  std::vector<double> decision_times_;
  UpdateObserver observer_;

  Window make_window() const;
  void finish_gathering();
};

// Batch driver: preprocesses and steps every point through a fresh
// detector. Points must be index-contiguous from 0.
StreamResult run_stream(const DetectorConfig& cfg, const std::vector<SeriesPoint>& points);

// Reference baseline: two exponentially weighted moving averages with
// different forgetting factors; their gap is compared against a rolling
// mean + c * stddev of its own recent values.
struct NewmaConfig {
  double lambda_fast = 0.2;
  double lambda_slow = 0.02;
  double scale_c = 4.0;
  std::size_t stat_window = 500;  // statistics kept for the rolling threshold
  std::size_t min_history = 30;   // statistics required before detections fire
};

class NewmaDetector {
 public:
  explicit NewmaDetector(const NewmaConfig& cfg = {});

  std::optional<Detection> step(const SeriesPoint& pt);

  double statistic() const { return stat_; }
  const std::vector<Detection>& detections() const { return detections_; }
  const std::vector<ScorePoint>& trace() const { return trace_; }

 private:
  NewmaConfig cfg_;
  bool primed_ = false;
  double fast_ = 0.0;
  double slow_ = 0.0;
  double stat_ = 0.0;
  std::size_t cursor_ = 0;
  std::deque<double> history_;
  std::vector<Detection> detections_;
  std::vector<ScorePoint> trace_;
};

StreamResult run_newma_stream(const NewmaConfig& cfg, const std::vector<SeriesPoint>& points);

}  // namespace mocpd
