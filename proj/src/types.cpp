#include "mocpd/types.hpp"

#include <json.hpp>
#include <stdexcept>

namespace mocpd {

const char* to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::Mean: return "mean";
    case MeasureKind::Mmd: return "mmd";
    case MeasureKind::Vae: return "vae";
  }
  return "mean";
}

const char* to_string(UpdateScheme s) {
  switch (s) {
    case UpdateScheme::Random: return "random";
    case UpdateScheme::Reservoir: return "reservoir";
    case UpdateScheme::Prototype: return "prototype";
  }
  return "random";
}

bool parse_measure(const std::string& text, MeasureKind& out) {
  if (text == "mean") { out = MeasureKind::Mean; return true; }
  if (text == "mmd") { out = MeasureKind::Mmd; return true; }
  if (text == "vae") { out = MeasureKind::Vae; return true; }
  return false;
}

bool parse_scheme(const std::string& text, UpdateScheme& out) {
  if (text == "random") { out = UpdateScheme::Random; return true; }
  if (text == "reservoir") { out = UpdateScheme::Reservoir; return true; }
  if (text == "prototype") { out = UpdateScheme::Prototype; return true; }
  return false;
}

DetectorConfig DetectorConfig::benchmark(std::size_t w, std::size_t m) {
  DetectorConfig cfg;
  cfg.window = w;
  cfg.max_memory = m;
  cfg.min_memory = m < 8 ? m : 8;
  cfg.buffer = 20;
  cfg.stride = 10;
  cfg.alpha = 2.0;
  cfg.quantile_p = 0.975;
  cfg.tolerance = 25;
  return cfg;
}

std::vector<std::string> validate_config(const DetectorConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.window < 2) errors.push_back("w too small (window must be >= 2)");
  if (cfg.min_memory > cfg.max_memory) errors.push_back("n exceeds m (min-memory must be <= memory)");
  if (cfg.min_memory < 2) errors.push_back("n too small (min-memory must be >= 2)");
  if (cfg.stride < 1) errors.push_back("r too small (stride must be >= 1)");
  if (cfg.buffer < 1) errors.push_back("b too small (buffer must be >= 1)");
  if (!(cfg.alpha > 0.0)) errors.push_back("alpha must be > 0");
  if (!(cfg.quantile_p > 0.0 && cfg.quantile_p < 1.0)) errors.push_back("p must lie in (0,1)");
  if (cfg.mmd_bandwidth < 0.0) errors.push_back("mmd-bandwidth must be >= 0");
  return errors;
}

std::string DetectorConfig::to_json() const {
  nlohmann::ordered_json j;
  j["window"] = window;
  j["memory"] = max_memory;
  j["min_memory"] = min_memory;
  j["buffer"] = buffer;
  j["stride"] = stride;
  j["alpha"] = alpha;
  j["quantile"] = quantile_p;
  j["measure"] = to_string(measure);
  j["mmd_bandwidth"] = mmd_bandwidth;
  j["scheme"] = to_string(scheme);
  j["seed"] = seed;
  j["tolerance"] = tolerance;
  j["ssa"] = ssa;
  return j.dump();
}

DetectorConfig DetectorConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  DetectorConfig cfg;
  if (j.contains("window")) cfg.window = j.at("window").get<std::size_t>();
  if (j.contains("memory")) cfg.max_memory = j.at("memory").get<std::size_t>();
  if (j.contains("min_memory")) cfg.min_memory = j.at("min_memory").get<std::size_t>();
  if (j.contains("buffer")) cfg.buffer = j.at("buffer").get<std::size_t>();
  if (j.contains("stride")) cfg.stride = j.at("stride").get<std::size_t>();
  if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
  if (j.contains("quantile")) cfg.quantile_p = j.at("quantile").get<double>();
  if (j.contains("measure")) {
    if (!parse_measure(j.at("measure").get<std::string>(), cfg.measure))
      throw std::runtime_error("config parse error: unknown measure");
  }
  if (j.contains("mmd_bandwidth")) cfg.mmd_bandwidth = j.at("mmd_bandwidth").get<double>();
  if (j.contains("scheme")) {
    if (!parse_scheme(j.at("scheme").get<std::string>(), cfg.scheme))
      throw std::runtime_error("config parse error: unknown scheme");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<std::size_t>();
  if (j.contains("ssa")) cfg.ssa = j.at("ssa").get<bool>();
  return cfg;
}

}  // namespace mocpd
