#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>
#include <sstream>

#include "mocpd/csv.hpp"
#include "mocpd/detector.hpp"
#include "mocpd/evaluate.hpp"
#include "mocpd/simulate.hpp"
#include "mocpd/types.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace mocpd::cli {

namespace {

struct TimingStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p99_ms = 0.0;
  std::size_t count = 0;
};

TimingStats timing_stats(std::vector<double> times) {
  TimingStats s;
  s.count = times.size();
  if (times.empty()) return s;
  double sum = 0.0;
  for (double t : times) sum += t;
  s.mean_ms = sum / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  s.median_ms = times[times.size() / 2];
  s.p99_ms = times[static_cast<std::size_t>(0.99 * static_cast<double>(times.size() - 1))];
  return s;
}

ordered_json timing_json(const TimingStats& s) {
  ordered_json j;
  j["mean_ms"] = s.mean_ms;
  j["median_ms"] = s.median_ms;
  j["p99_ms"] = s.p99_ms;
  j["decisions"] = s.count;
  return j;
}

void write_manifest(const fs::path& dir, const ordered_json& manifest) {
  io::atomic_write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

struct SimulateOptions {
  std::string kind;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::size_t segments = 49;
  std::size_t seg_len = 500;
  std::size_t length = 20000;
  double sigma = 0.78;
  double avg_rate = 0.2;
  double trend_amp = 0.0;
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out) {
  sim::LabeledSeries series;
  Rng rng(opt.seed);
  ordered_json params;
  params["seed"] = opt.seed;

  if (opt.kind == "jm") {
    series = sim::gen_jumping_mean(opt.segments, opt.seg_len, rng);
    params["segments"] = opt.segments;
    params["seg_len"] = opt.seg_len;
  } else if (opt.kind == "gm") {
    series = sim::gen_gaussian_mixture(opt.segments, opt.seg_len, rng);
    params["segments"] = opt.segments;
    params["seg_len"] = opt.seg_len;
  } else if (opt.kind == "fl") {
    sim::FlConfig cfg;
    cfg.length = opt.length;
    cfg.noise_sigma = opt.sigma;
    cfg.avg_rate_gph = opt.avg_rate;
    cfg.trend_amplitude = opt.trend_amp;
    const sim::FlSeries fl = sim::gen_fuel_leak(cfg, rng);
    series = fl.series;
    params["length"] = opt.length;
    params["sigma"] = opt.sigma;
    params["avg_rate_gph"] = opt.avg_rate;
    params["trend_amplitude"] = opt.trend_amp;
    params["drawn_rate_gph"] = fl.scenario.drawn_rate_gph;
    params["leak_start"] = fl.scenario.start_idx;
    params["leak_stop"] = fl.scenario.stop_idx;
  } else {
    throw std::runtime_error("unknown simulation kind '" + opt.kind + "'");
  }

  const fs::path dir(opt.out_dir);
  fs::create_directories(dir);
  io::write_series_csv((dir / "series.csv").string(), series.values);
  io::write_truth_csv((dir / "truth.csv").string(), series.cps);

  ordered_json manifest;
  manifest["version"] = kToolVersion;
  manifest["command"] = "simulate";
  manifest["kind"] = opt.kind;
  manifest["params"] = params;
  manifest["rows"] = series.values.size();
  manifest["change_points"] = series.cps.size();
  manifest["outputs"] = {"series.csv", "truth.csv"};
  write_manifest(dir, manifest);

  out << "wrote " << series.values.size() << " rows, " << series.cps.size()
      << " change points to " << dir.string() << "\n";
  return 0;
}

struct DetectOptions {
  std::string in_path;
  std::string out_dir;
  std::string config_path;
  std::string baseline;  // empty or "newma"
  DetectorConfig cfg;
};

ordered_json detect_one(const fs::path& input, const fs::path& out_dir,
                        const DetectOptions& opt) {
  const std::vector<SeriesPoint> points = io::read_series_csv(input.string());

  StreamResult result;
  if (opt.baseline == "newma") {
    result = run_newma_stream(NewmaConfig{}, points);
  } else {
    result = run_stream(opt.cfg, points);
  }

  fs::create_directories(out_dir);
  io::write_detections_csv((out_dir / "detections.csv").string(), result.detections);
  io::write_trace_csv((out_dir / "trace.csv").string(), result.trace);

  ordered_json manifest;
  manifest["version"] = kToolVersion;
  manifest["command"] = "detect";
  manifest["input"] = input.string();
  if (opt.baseline == "newma") {
    manifest["baseline"] = "newma";
  } else {
    manifest["config"] = ordered_json::parse(opt.cfg.to_json());
    manifest["seed"] = opt.cfg.seed;
  }
  manifest["points"] = points.size();
  manifest["detections"] = result.detections.size();
  manifest["scored_windows"] = result.trace.size();
  manifest["timing"] = timing_json(timing_stats(result.decision_times_ms));
  manifest["outputs"] = {"detections.csv", "trace.csv"};
  write_manifest(out_dir, manifest);
  return manifest;
}

int cmd_detect(const DetectOptions& opt, std::ostream& out) {
  const fs::path in(opt.in_path);
  const fs::path out_dir(opt.out_dir);

  if (fs::is_directory(in)) {
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(in))
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw std::runtime_error("no .csv files in " + in.string());

    // One detector per file; outputs land in per-file subdirectories and
    // the summary is assembled in filename order.
    std::vector<std::future<ordered_json>> jobs;
    jobs.reserve(inputs.size());
    for (const fs::path& input : inputs) {
      const fs::path sub = out_dir / input.stem();
      jobs.push_back(std::async(std::launch::async,
                                [input, sub, &opt]() { return detect_one(input, sub, opt); }));
    }

    ordered_json manifest;
    manifest["version"] = kToolVersion;
    manifest["command"] = "detect";
    manifest["input"] = in.string();
    manifest["files"] = ordered_json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const ordered_json sub = jobs[i].get();
      ordered_json entry;
      entry["input"] = inputs[i].string();
      entry["detections"] = sub["detections"];
      entry["timing"] = sub["timing"];
      manifest["files"].push_back(entry);
    }
    fs::create_directories(out_dir);
    write_manifest(out_dir, manifest);
    out << "processed " << inputs.size() << " files into " << out_dir.string() << "\n";
    return 0;
  }

  const ordered_json manifest = detect_one(in, out_dir, opt);
  out << manifest["detections"].get<std::size_t>() << " detections, "
      << manifest["scored_windows"].get<std::size_t>() << " scored windows -> "
      << out_dir.string() << "\n";
  return 0;
}

struct EvaluateOptions {
  std::string detections_path;
  std::string truth_path;
  std::string out_path;
  std::size_t tolerance = 480;
  double beta = 2.0;
};

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  std::vector<eval::SequenceInput> sequences;

  const fs::path det(opt.detections_path);
  const fs::path truth(opt.truth_path);
  if (fs::is_directory(det) != fs::is_directory(truth))
    throw std::runtime_error("detections and truth must both be files or both directories");

  if (fs::is_directory(det)) {
    std::vector<fs::path> det_files, truth_files;
    for (const auto& e : fs::recursive_directory_iterator(det))
      if (e.is_regular_file() && e.path().filename() == "detections.csv")
        det_files.push_back(e.path());
    for (const auto& e : fs::directory_iterator(truth))
      if (e.is_regular_file() && e.path().extension() == ".csv") truth_files.push_back(e.path());
    std::sort(det_files.begin(), det_files.end());
    std::sort(truth_files.begin(), truth_files.end());
    if (det_files.size() != truth_files.size())
      throw std::runtime_error("detections/truth file counts differ");
    for (std::size_t i = 0; i < det_files.size(); ++i) {
      eval::SequenceInput seq;
      seq.detections = io::read_detection_indices_csv(det_files[i].string());
      seq.truth = io::read_truth_csv(truth_files[i].string());
      sequences.push_back(std::move(seq));
    }
  } else {
    eval::SequenceInput seq;
    seq.detections = io::read_detection_indices_csv(det.string());
    seq.truth = io::read_truth_csv(truth.string());
    sequences.push_back(std::move(seq));
  }

  const eval::EvalReport report = eval::evaluate_corpus(sequences, opt.tolerance, opt.beta);
  const std::string json = eval::report_to_json(report, opt.tolerance, opt.beta);

  const fs::path out_path(opt.out_path);
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  io::atomic_write_text(out_path.string(), json + "\n");

  ordered_json manifest;
  manifest["version"] = kToolVersion;
  manifest["command"] = "evaluate";
  manifest["detections"] = det.string();
  manifest["truth"] = truth.string();
  manifest["tolerance"] = opt.tolerance;
  manifest["beta"] = opt.beta;
  manifest["outputs"] = {out_path.filename().string()};
  write_manifest(out_path.has_parent_path() ? out_path.parent_path() : fs::path("."), manifest);

  out << "recall " << report.recall << ", precision " << report.precision << ", f_beta "
      << report.f_beta << " -> " << out_path.string() << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"memory-based online change-point detection over CSV streams"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a labelled series");
  sim_cmd->add_option("--kind", sim_opt.kind, "fl | jm | gm")->required();
  sim_cmd->add_option("--out", sim_opt.out_dir, "output directory")->required();
  sim_cmd->add_option("--seed", sim_opt.seed, "random seed");
  sim_cmd->add_option("--segments", sim_opt.segments, "segments (jm/gm)");
  sim_cmd->add_option("--seg-len", sim_opt.seg_len, "segment length (jm/gm)");
  sim_cmd->add_option("--length", sim_opt.length, "series length (fl)");
  sim_cmd->add_option("--sigma", sim_opt.sigma, "base noise stddev (fl)");
  sim_cmd->add_option("--avg-rate", sim_opt.avg_rate, "average leak rate in gph (fl)");
  sim_cmd->add_option("--trend-amp", sim_opt.trend_amp, "slow trend amplitude (fl)");

  DetectOptions det_opt;
  std::string measure_name, scheme_name;
  bool ssa_off = false;
  CLI::App* det_cmd = app.add_subcommand("detect", "run the detector over a series");
  det_cmd->add_option("--in", det_opt.in_path, "series.csv or a directory of them")->required();
  det_cmd->add_option("--out", det_opt.out_dir, "output directory")->required();
  det_cmd->add_option("--config", det_opt.config_path, "JSON config file (flags override)");
  auto* o_window = det_cmd->add_option("--window", det_opt.cfg.window, "window size w");
  auto* o_memory = det_cmd->add_option("--memory", det_opt.cfg.max_memory, "memory capacity m");
  auto* o_minmem = det_cmd->add_option("--min-memory", det_opt.cfg.min_memory, "collection target n");
  auto* o_buffer = det_cmd->add_option("--buffer", det_opt.cfg.buffer, "buffer size b");
  auto* o_stride = det_cmd->add_option("--stride", det_opt.cfg.stride, "stride r");
  auto* o_alpha = det_cmd->add_option("--alpha", det_opt.cfg.alpha, "threshold scale");
  auto* o_quantile = det_cmd->add_option("--quantile", det_opt.cfg.quantile_p, "quantile p");
  auto* o_measure = det_cmd->add_option("--measure", measure_name, "mean | mmd | vae");
  auto* o_bandwidth =
      det_cmd->add_option("--mmd-bandwidth", det_opt.cfg.mmd_bandwidth, "fixed kernel bandwidth");
  auto* o_scheme = det_cmd->add_option("--scheme", scheme_name, "random | reservoir | prototype");
  auto* o_seed = det_cmd->add_option("--seed", det_opt.cfg.seed, "random seed");
  auto* o_tol = det_cmd->add_option("--tolerance", det_opt.cfg.tolerance, "match tolerance");
  auto* o_ssa_off = det_cmd->add_flag("--ssa-off", ssa_off, "disable SSA preprocessing");
  det_cmd->add_option("--baseline", det_opt.baseline, "newma");

  EvaluateOptions eval_opt;
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score detections against ground truth");
  eval_cmd->add_option("--detections", eval_opt.detections_path, "detections.csv or directory")
      ->required();
  eval_cmd->add_option("--truth", eval_opt.truth_path, "truth.csv or directory")->required();
  eval_cmd->add_option("--out", eval_opt.out_path, "report path")->required();
  eval_cmd->add_option("--tolerance", eval_opt.tolerance, "match tolerance in samples");
  eval_cmd->add_option("--beta", eval_opt.beta, "F-score beta");

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  storage.insert(storage.begin(), "mocpd");
  argv.reserve(storage.size());
  for (std::string& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << ordered_json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim_opt, out);

    if (*det_cmd) {
      if (!det_opt.config_path.empty()) {
        std::ifstream in(det_opt.config_path);
        if (!in.good()) throw std::runtime_error("cannot open " + det_opt.config_path);
        std::stringstream buf;
        buf << in.rdbuf();
        DetectorConfig file_cfg = DetectorConfig::from_json(buf.str());
        // CLI flags win over the config file.
        if (!*o_window) det_opt.cfg.window = file_cfg.window;
        if (!*o_memory) det_opt.cfg.max_memory = file_cfg.max_memory;
        if (!*o_minmem) det_opt.cfg.min_memory = file_cfg.min_memory;
        if (!*o_buffer) det_opt.cfg.buffer = file_cfg.buffer;
        if (!*o_stride) det_opt.cfg.stride = file_cfg.stride;
        if (!*o_alpha) det_opt.cfg.alpha = file_cfg.alpha;
        if (!*o_quantile) det_opt.cfg.quantile_p = file_cfg.quantile_p;
        if (!*o_measure) det_opt.cfg.measure = file_cfg.measure;
        if (!*o_bandwidth) det_opt.cfg.mmd_bandwidth = file_cfg.mmd_bandwidth;
        if (!*o_scheme) det_opt.cfg.scheme = file_cfg.scheme;
        if (!*o_seed) det_opt.cfg.seed = file_cfg.seed;
        if (!*o_tol) det_opt.cfg.tolerance = file_cfg.tolerance;
        if (!*o_ssa_off) det_opt.cfg.ssa = file_cfg.ssa;
      }
      if (*o_measure && !parse_measure(measure_name, det_opt.cfg.measure))
        throw std::runtime_error("unknown measure '" + measure_name + "'");
      if (*o_scheme && !parse_scheme(scheme_name, det_opt.cfg.scheme))
        throw std::runtime_error("unknown scheme '" + scheme_name + "'");
      if (ssa_off) det_opt.cfg.ssa = false;
      if (!det_opt.baseline.empty() && det_opt.baseline != "newma")
        throw std::runtime_error("unknown baseline '" + det_opt.baseline + "'");
      if (det_opt.baseline.empty()) {
        const auto errors = validate_config(det_opt.cfg);
        if (!errors.empty()) {
          std::string msg;
          for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
          throw std::runtime_error(msg);
        }
      }
      return cmd_detect(det_opt, out);
    }

    if (*eval_cmd) return cmd_evaluate(eval_opt, out);
  } catch (const io::CsvError& e) {
    err << ordered_json{{"error", e.what()}, {"line", e.line()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << ordered_json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 2;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace mocpd::cli
