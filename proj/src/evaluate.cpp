#include "mocpd/evaluate.hpp"

#include <algorithm>
#include <json.hpp>

namespace mocpd::eval {

MatchResult match_detections(std::vector<std::size_t> truth, std::vector<std::size_t> detections,
                             std::size_t tolerance) {
  std::sort(truth.begin(), truth.end());
  std::sort(detections.begin(), detections.end());

  MatchResult out;
  std::size_t j = 0;
  for (const std::size_t t : truth) {
    while (j < detections.size() && detections[j] < t) {
      out.false_positives.push_back(detections[j]);
      ++j;
    }
    if (j < detections.size() && detections[j] <= t + tolerance) {
      out.pairs.emplace_back(t, detections[j]);
      ++j;
    } else {
      out.false_negatives.push_back(t);
    }
  }
  for (; j < detections.size(); ++j) out.false_positives.push_back(detections[j]);
  return out;
}

double f_beta(double precision, double recall, double beta) {
  const double b2 = beta * beta;
  const double denom = b2 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return (1.0 + b2) * precision * recall / denom;
}

double mean_delay(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [t, d] : pairs)
    sum += static_cast<double>(d > t ? d - t : t - d);
  return sum / static_cast<double>(pairs.size());
}

namespace {

SequenceScore score_counts(std::size_t tp, std::size_t fp, std::size_t fn, double delay,
                           bool has_pairs, double beta) {
  SequenceScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  s.recall_defined = tp + fn > 0;
  s.precision_defined = tp + fp > 0;
  s.recall = s.recall_defined ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.precision = s.precision_defined ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.f_beta = f_beta(s.precision, s.recall, beta);
  s.mean_delay = delay;
  s.delay_defined = has_pairs;
  return s;
}

}  // namespace

EvalReport evaluate_corpus(const std::vector<SequenceInput>& sequences, std::size_t tolerance,
                           double beta) {
  EvalReport report;
  double delay_sum = 0.0;
  std::size_t delay_count = 0;

  for (const SequenceInput& seq : sequences) {
    const MatchResult m = match_detections(seq.truth, seq.detections, tolerance);
    const SequenceScore s =
        score_counts(m.pairs.size(), m.false_positives.size(), m.false_negatives.size(),
                     mean_delay(m.pairs), !m.pairs.empty(), beta);
    report.per_sequence.push_back(s);
    report.tp += s.tp;
    report.fp += s.fp;
    report.fn += s.fn;
    for (const auto& [t, d] : m.pairs) delay_sum += static_cast<double>(d - t);
    delay_count += m.pairs.size();
  }

  const SequenceScore pooled = score_counts(
      report.tp, report.fp, report.fn,
      delay_count > 0 ? delay_sum / static_cast<double>(delay_count) : 0.0, delay_count > 0, beta);
  report.recall = pooled.recall;
  report.precision = pooled.precision;
  report.f_beta = pooled.f_beta;
  report.mean_delay = pooled.mean_delay;
  report.recall_defined = pooled.recall_defined;
  report.precision_defined = pooled.precision_defined;
  report.delay_defined = pooled.delay_defined;
  return report;
}

std::string report_to_json(const EvalReport& report, std::size_t tolerance, double beta) {
  nlohmann::ordered_json j;
  j["tp"] = report.tp;
  j["fp"] = report.fp;
  j["fn"] = report.fn;
  j["recall"] = report.recall;
  j["precision"] = report.precision;
  j["f_beta"] = report.f_beta;
  j["mean_delay_samples"] = report.mean_delay;
  j["mean_delay_days"] = report.mean_delay / 48.0;
  j["recall_defined"] = report.recall_defined;
  j["precision_defined"] = report.precision_defined;
  j["delay_defined"] = report.delay_defined;
  j["tolerance"] = tolerance;
  j["beta"] = beta;
  j["per_sequence"] = nlohmann::ordered_json::array();
  for (const SequenceScore& s : report.per_sequence) {
    nlohmann::ordered_json e;
    e["tp"] = s.tp;
    e["fp"] = s.fp;
    e["fn"] = s.fn;
    e["recall"] = s.recall;
    e["precision"] = s.precision;
    e["f_beta"] = s.f_beta;
    e["mean_delay_samples"] = s.mean_delay;
    e["recall_defined"] = s.recall_defined;
    e["precision_defined"] = s.precision_defined;
    e["delay_defined"] = s.delay_defined;
    j["per_sequence"].push_back(e);
  }
  return j.dump(2);
}

}  // namespace mocpd::eval
