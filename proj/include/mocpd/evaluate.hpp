#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mocpd::eval {

// Greedy one-to-one matching in time order: each true change point takes
// the earliest unmatched detection d with t <= d <= t + tolerance.
// Detections before the true point never match it.
struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth, detection)
  std::vector<std::size_t> false_positives;
  std::vector<std::size_t> false_negatives;
};

MatchResult match_detections(std::vector<std::size_t> truth, std::vector<std::size_t> detections,
                             std::size_t tolerance);

// (1 + beta^2) P R / (beta^2 P + R), 0 when the denominator vanishes.
double f_beta(double precision, double recall, double beta);

// Mean |detection - truth| over matched pairs; 0 for an empty list.
double mean_delay(const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

struct SequenceScore {
  std::size_t tp = 0, fp = 0, fn = 0;
  double recall = 0.0, precision = 0.0, f_beta = 0.0, mean_delay = 0.0;
  bool recall_defined = false, precision_defined = false, delay_defined = false;
};

struct EvalReport {
  std::size_t tp = 0, fp = 0, fn = 0;
  double recall = 0.0, precision = 0.0, f_beta = 0.0;
  double mean_delay = 0.0;  // in samples
  bool recall_defined = false, precision_defined = false, delay_defined = false;
  std::vector<SequenceScore> per_sequence;
};

struct SequenceInput {
  std::vector<std::size_t> truth;
  std::vector<std::size_t> detections;
};

// Pools counts across sequences (micro-averaging) and also reports the
// per-sequence breakdown. Undefined ratios come back as 0 with their
// defined-flag cleared, never NaN.
EvalReport evaluate_corpus(const std::vector<SequenceInput>& sequences, std::size_t tolerance,
                           double beta);

std::string report_to_json(const EvalReport& report, std::size_t tolerance, double beta);

}  // namespace mocpd::eval
