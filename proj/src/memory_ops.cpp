#include "mocpd/memory_ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mocpd {

std::vector<double> centroid(const std::vector<Window>& samples) {
  if (samples.empty()) throw std::invalid_argument("centroid: empty sample set");
  const std::size_t w = samples.front().values.size();
  std::vector<double> out(w, 0.0);
  for (const Window& s : samples) {
    if (s.values.size() != w) throw std::invalid_argument("centroid: unequal window lengths");
    for (std::size_t i = 0; i < w; ++i) out[i] += s.values[i];
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : out) v *= inv;
  return out;
}

double quantile_linear(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double compute_threshold(const std::vector<Window>& samples, const std::vector<double>& center,
                         const Measure& measure, double alpha, double p) {
  if (samples.size() < 2) throw std::invalid_argument("compute_threshold: need at least 2 samples");
  std::vector<double> scores;
  scores.reserve(samples.size());
  for (const Window& s : samples) scores.push_back(measure.score(s.values, center));
  return alpha * quantile_linear(std::move(scores), p);
}

std::vector<Window> update_random(const std::vector<Window>& memory_samples,
                                  const std::vector<Window>& buffer, std::size_t m, Rng& rng) {
  std::vector<Window> pool;
  pool.reserve(memory_samples.size() + buffer.size());
  pool.insert(pool.end(), memory_samples.begin(), memory_samples.end());
  pool.insert(pool.end(), buffer.begin(), buffer.end());
  if (pool.size() <= m) return pool;

  std::vector<Window> kept;
  kept.reserve(m);
  for (std::size_t i : sample_indices(pool.size(), m, rng)) kept.push_back(std::move(pool[i]));
  return kept;
}

void update_reservoir(Memory& memory, const Window& incoming, std::size_t m, Rng& rng) {
  ++memory.seen_count;
  if (memory.samples.size() < m) {
    memory.samples.push_back(incoming);
    return;
  }
  const std::size_t slot = rng.uniform_index(memory.seen_count);
  if (slot < m) memory.samples[slot] = incoming;
}

std::vector<Window> update_prototype(const std::vector<Window>& memory_samples,
                                     const std::vector<Window>& buffer, std::size_t m) {
  std::vector<Window> pool;
  pool.reserve(memory_samples.size() + buffer.size());
  pool.insert(pool.end(), memory_samples.begin(), memory_samples.end());
  pool.insert(pool.end(), buffer.begin(), buffer.end());
  if (pool.empty()) throw std::invalid_argument("update_prototype: empty union");
  if (pool.size() <= m) return pool;

  const std::vector<double> mean = centroid(pool);
  std::vector<std::pair<double, std::size_t>> ranked;  // (distance, pool index)
  ranked.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const double d = pool[i].values[j] - mean[j];
      d2 += d * d;
    }
    ranked.emplace_back(d2, i);
  }
  std::sort(ranked.begin(), ranked.end(), [&pool](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return pool[a.second].start < pool[b.second].start;
  });

  std::vector<Window> kept;
  kept.reserve(m);
  for (std::size_t i = 0; i < m; ++i) kept.push_back(std::move(pool[ranked[i].second]));
  std::sort(kept.begin(), kept.end(),
            [](const Window& a, const Window& b) { return a.start < b.start; });
  return kept;
}

void run_update_phase(Memory& memory, const std::vector<Window>& buffer,
                      const DetectorConfig& cfg, Measure& measure, Rng& rng,
                      const UpdateObserver* observer) {
  // Threshold first, from the pre-update distribution: the deliberate lag
  // that keeps the threshold from chasing the score during a real change.
  const double new_threshold =
      compute_threshold(memory.samples, memory.centroid, measure, cfg.alpha, cfg.quantile_p);

  if (observer != nullptr && *observer) {
    UpdateEvent ev;
    ev.pre_samples = memory.samples;
    ev.pre_centroid = memory.centroid;
    ev.pre_bandwidth = measure.bandwidth;
    ev.installed_threshold = new_threshold;
    (*observer)(ev);
  }
  memory.threshold = new_threshold;

  switch (cfg.scheme) {
    case UpdateScheme::Random:
      memory.samples = update_random(memory.samples, buffer, cfg.max_memory, rng);
      memory.seen_count += buffer.size();
      break;
    case UpdateScheme::Reservoir:
      for (const Window& w : buffer) update_reservoir(memory, w, cfg.max_memory, rng);
      break;
    case UpdateScheme::Prototype:
      memory.samples = update_prototype(memory.samples, buffer, cfg.max_memory);
      memory.seen_count += buffer.size();
      break;
  }

  memory.centroid = centroid(memory.samples);
  measure.refresh_bandwidth(memory.samples, rng);
}

}  // namespace mocpd
