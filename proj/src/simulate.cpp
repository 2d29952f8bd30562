#include "mocpd/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace mocpd::sim {

double fuel_variance(double open_volume, double close_volume, double sales_volume,
                     double delivery_volume) {
  return close_volume - (open_volume - sales_volume + delivery_volume);
}

double sample_leak_rate(double avg_gph, Rng& rng) {
  if (!(avg_gph > 0.0)) throw std::invalid_argument("sample_leak_rate: average must be > 0");
  return rng.uniform(0.7 * avg_gph, 1.3 * avg_gph);
}

double leak_volume_per_interval(double leak_rate_gph, double level, double level_max) {
  if (!(level_max > 0.0)) throw std::invalid_argument("leak_volume: level_max must be > 0");
  if (level < 0.0 || level > level_max)
    throw std::invalid_argument("leak_volume: level outside [0, level_max]");
  return 0.5 * leak_rate_gph * std::sqrt(level / level_max);
}

LabeledSeries inject_leak(const std::vector<double>& base_variance, const LeakScenario& scenario) {
  const std::size_t n = base_variance.size();
  if (scenario.start_idx < kMinLeadSamples)
    throw std::invalid_argument("inject_leak: leak must start at least two months in");
  if (scenario.stop_idx < scenario.start_idx + kMinLeakSamples)
    throw std::invalid_argument("inject_leak: leak must last at least three months");
  if (scenario.stop_idx >= n) throw std::invalid_argument("inject_leak: stop index out of range");
  if (scenario.level_series.size() != n)
    throw std::invalid_argument("inject_leak: level series length mismatch");
  if (!(scenario.drawn_rate_gph >= 0.7 * scenario.avg_rate_gph &&
        scenario.drawn_rate_gph <= 1.3 * scenario.avg_rate_gph))
    throw std::invalid_argument("inject_leak: drawn rate outside +-30% of the average");

  LabeledSeries out;
  out.values = base_variance;
  for (std::size_t i = scenario.start_idx; i < scenario.stop_idx; ++i) {
    // A leak is a physical loss, so the interval volume comes off the
    // variance.
    out.values[i] -= leak_volume_per_interval(scenario.drawn_rate_gph, scenario.level_series[i],
                                              scenario.level_max);
  }
  out.cps = {scenario.start_idx, scenario.stop_idx};
  return out;
}

LabeledSeries gen_jumping_mean(std::size_t num_segments, std::size_t seg_len, Rng& rng) {
  LabeledSeries out;
  out.values.reserve(num_segments * seg_len);
  double noise_mean = 0.0;
  double prev1 = 0.0, prev2 = 0.0;
  for (std::size_t seg = 1; seg <= num_segments; ++seg) {
    if (seg >= 2) noise_mean += static_cast<double>(seg) / 16.0;
    for (std::size_t t = 0; t < seg_len; ++t) {
      const double x = 0.6 * prev1 - 0.5 * prev2 + rng.normal(noise_mean, 1.5);
      out.values.push_back(x);
      prev2 = prev1;
      prev1 = x;
    }
  }
  for (std::size_t seg = 1; seg < num_segments; ++seg) out.cps.push_back(seg * seg_len);
  return out;
}

LabeledSeries gen_gaussian_mixture(std::size_t num_segments, std::size_t seg_len, Rng& rng) {
  LabeledSeries out;
  out.values.reserve(num_segments * seg_len);
  for (std::size_t seg = 1; seg <= num_segments; ++seg) {
    const bool first_mixture = (seg % 2 == 1);
    for (std::size_t t = 0; t < seg_len; ++t) {
      const double u = rng.uniform01();
      double x;
      if (first_mixture)
        x = (u < 0.5) ? rng.normal(-1.0, 0.5) : rng.normal(1.0, 0.5);
      else
        x = (u < 0.8) ? rng.normal(-1.0, 1.0) : rng.normal(1.0, 0.1);
      out.values.push_back(x);
    }
  }
  for (std::size_t seg = 1; seg < num_segments; ++seg) out.cps.push_back(seg * seg_len);
  return out;
}

FlSeries gen_fuel_leak(const FlConfig& cfg, Rng& rng) {
  const std::size_t min_len = kMinLeadSamples + kMinLeakSamples + cfg.end_margin + 1;
  if (cfg.length < min_len)
    throw std::invalid_argument("gen_fuel_leak: series too short for the leak geometry");
  if (!(cfg.level_min_frac >= 0.0 && cfg.level_min_frac < 1.0))
    throw std::invalid_argument("gen_fuel_leak: level_min_frac outside [0,1)");

  FlSeries out;
  out.scenario.avg_rate_gph = cfg.avg_rate_gph;
  out.scenario.drawn_rate_gph = sample_leak_rate(cfg.avg_rate_gph, rng);
  out.scenario.level_max = cfg.level_max;

  const std::size_t start_max = cfg.length - kMinLeakSamples - cfg.end_margin - 1;
  out.scenario.start_idx =
      kMinLeadSamples + rng.uniform_index(start_max - kMinLeadSamples + 1);
  const std::size_t stop_min = out.scenario.start_idx + kMinLeakSamples;
  const std::size_t stop_max = cfg.length - cfg.end_margin - 1;
  out.scenario.stop_idx = stop_min + rng.uniform_index(stop_max - stop_min + 1);

  // Sawtooth inventory between refills.
  out.scenario.level_series.resize(cfg.length);
  const double level_min = cfg.level_min_frac * cfg.level_max;
  for (std::size_t i = 0; i < cfg.length; ++i) {
    const double frac =
        static_cast<double>(i % cfg.refill_period) / static_cast<double>(cfg.refill_period);
    out.scenario.level_series[i] = cfg.level_max - (cfg.level_max - level_min) * frac;
  }

  std::vector<double> base(cfg.length);
  for (std::size_t i = 0; i < cfg.length; ++i) {
    double v = rng.normal(0.0, cfg.noise_sigma);
    if (cfg.trend_amplitude != 0.0)
      v += cfg.trend_amplitude *
           std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(i) / cfg.trend_period);
    base[i] = v;
  }

  out.series = inject_leak(base, out.scenario);
  return out;
}

}  // namespace mocpd::sim
