#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "mocpd/dissimilarity.hpp"
#include "mocpd/rng.hpp"
#include "mocpd/types.hpp"

namespace mocpd {

// Element-wise mean of a non-empty set of equal-length windows.
std::vector<double> centroid(const std::vector<Window>& samples);

// Quantile with linear interpolation between order statistics at position
// (n - 1) * p. Sorts a copy.
double quantile_linear(std::vector<double> values, double p);

// T = alpha * Q(S, p) where S holds the dissimilarities of every sample
// against `center`. Requires at least two samples.
double compute_threshold(const std::vector<Window>& samples, const std::vector<double>& center,
                         const Measure& measure, double alpha, double p);

// Uniform random m-subset of memory ∪ buffer, without replacement; the
// whole union if it fits.
std::vector<Window> update_random(const std::vector<Window>& memory_samples,
                                  const std::vector<Window>& buffer, std::size_t m, Rng& rng);

// Classic streaming reservoir: the incoming window is kept with
// probability m / seen_count, replacing a uniformly random slot.
void update_reservoir(Memory& memory, const Window& incoming, std::size_t m, Rng& rng);

// Keeps the m windows closest (Euclidean) to the union mean; ties broken
// by earlier start index.
std::vector<Window> update_prototype(const std::vector<Window>& memory_samples,
                                     const std::vector<Window>& buffer, std::size_t m);

// Snapshot handed to an update-phase observer: the memory as it stood
// before resampling and the threshold that was installed from it.
struct UpdateEvent {
  std::vector<Window> pre_samples;
  std::vector<double> pre_centroid;
  double pre_bandwidth = 0.0;
  double installed_threshold = 0.0;
};

using UpdateObserver = std::function<void(const UpdateEvent&)>;

// The periodic update, strictly ordered: (1) threshold recomputed from the
// pre-update samples and centroid, (2) memory resampled from
// memory ∪ buffer per the configured scheme, (3) centroid recomputed,
// (4) MMD bandwidth refreshed from the new samples. The buffer is cleared
// by the caller.
void run_update_phase(Memory& memory, const std::vector<Window>& buffer,
                      const DetectorConfig& cfg, Measure& measure, Rng& rng,
                      const UpdateObserver* observer = nullptr);

}  // namespace mocpd
