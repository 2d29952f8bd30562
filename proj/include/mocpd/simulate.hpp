#pragma once

#include <cstddef>
#include <vector>

#include "mocpd/rng.hpp"

namespace mocpd::sim {

// Samples per day at the 30-minute cadence, and the minimum pre-leak /
// leak spans used when drawing scenarios.
constexpr std::size_t kSamplesPerDay = 48;
constexpr std::size_t kMinLeadSamples = 2 * 30 * kSamplesPerDay;  // two months
constexpr std::size_t kMinLeakSamples = 3 * 30 * kSamplesPerDay;  // three months

// Closing volume minus the theoretical volume reconstructed from opening
// volume, sales and deliveries.
double fuel_variance(double open_volume, double close_volume, double sales_volume,
                     double delivery_volume);

// Uniform draw within +-30% of the average leak rate (gal/hr).
double sample_leak_rate(double avg_gph, Rng& rng);

// Volume lost over one 30-minute interval for a bottom-of-tank leak:
// 0.5 * rate * sqrt(level / level_max).
double leak_volume_per_interval(double leak_rate_gph, double level, double level_max);

struct LeakScenario {
  double avg_rate_gph = 0.2;
  double drawn_rate_gph = 0.2;
  std::size_t start_idx = 0;
  std::size_t stop_idx = 0;
  std::vector<double> level_series;  // product level per interval
  double level_max = 0.0;            // monthly maximum inventory height
};

struct LabeledSeries {
  std::vector<double> values;
  std::vector<std::size_t> cps;  // true change-point indices, ascending
};

// Subtracts the per-interval leak volume from the base variance over
// [start_idx, stop_idx); the onset and the repair are both change points.
LabeledSeries inject_leak(const std::vector<double>& base_variance, const LeakScenario& scenario);

// Autoregressive sequence x_i = 0.6 x_{i-1} - 0.5 x_{i-2} + e_i with
// e_i ~ N(mu_N, 1.5^2), where mu_1 = 0 and mu_N = mu_{N-1} + N/16 in
// segment N. One change point per segment boundary.
LabeledSeries gen_jumping_mean(std::size_t num_segments, std::size_t seg_len, Rng& rng);

// Alternates between 0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2) (odd segments)
// and 0.8 N(-1, 1.0^2) + 0.2 N(1, 0.1^2) (even segments).
LabeledSeries gen_gaussian_mixture(std::size_t num_segments, std::size_t seg_len, Rng& rng);

// Synthetic fuel-variance stream standing in for tank telemetry: Gaussian
// base noise plus an optional slow sinusoidal trend, product levels as a
// sawtooth between refills, and one leak span drawn per the EPA-style
// geometry (lead-in of at least two months, leak of at least three).
struct FlConfig {
  std::size_t length = 20000;
  double noise_sigma = 0.04;
  double trend_amplitude = 0.0;
  double trend_period = 4800.0;
  double avg_rate_gph = 0.2;
  double level_max = 3000.0;
  double level_min_frac = 0.5;  // refill at half tank
  std::size_t refill_period = 30 * kSamplesPerDay;
  std::size_t end_margin = 2000;  // leave room to observe the repair
};

struct FlSeries {
  LabeledSeries series;
  LeakScenario scenario;
};

FlSeries gen_fuel_leak(const FlConfig& cfg, Rng& rng);

}  // namespace mocpd::sim
