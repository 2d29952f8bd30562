#include "mocpd/detector.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mocpd {

namespace {

constexpr std::size_t kVaeLatent = 2;
constexpr std::size_t kVaeEpochs = 100;
constexpr double kVaeLearningRate = 0.01;

double mean_of(const std::deque<double>& q) {
  double s = 0.0;
  for (double v : q) s += v;
  return q.empty() ? 0.0 : s / static_cast<double>(q.size());
}

double stddev_of(const std::deque<double>& q, double mean) {
  if (q.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : q) {
    const double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(q.size() - 1));
}

}  // namespace

MocpdDetector::MocpdDetector(const DetectorConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
  const auto errors = validate_config(cfg_);
  if (!errors.empty()) {
    std::string msg = "invalid detector config:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  if (cfg_.ssa) {
    SsaConfig ssa_cfg;
    filter_.emplace(ssa_cfg);
  }
  measure_.kind = cfg_.measure;
  measure_.auto_bandwidth = cfg_.mmd_bandwidth <= 0.0;
  if (!measure_.auto_bandwidth) measure_.bandwidth = cfg_.mmd_bandwidth;
  measure_.vae = &vae_;
}

Window MocpdDetector::make_window() const {
  Window w;
  w.start = cursor_ + 1 - cfg_.window;
  w.values.assign(pending_.begin(), pending_.end());
  return w;
}

std::size_t MocpdDetector::collect_remaining() const {
  if (phase_ == Phase::Detecting) return 0;
  return cfg_.min_memory - std::min(cfg_.min_memory, memory_.samples.size());
}

void MocpdDetector::finish_gathering() {
  memory_.centroid = centroid(memory_.samples);
  measure_.refresh_bandwidth(memory_.samples, rng_);
  if (cfg_.measure == MeasureKind::Vae) {
    // Fresh parameters per distribution; no warm start across changes.
    vae_ = VaeModel::init(cfg_.window, kVaeLatent, rng_);
    vae_train(vae_, memory_.samples, kVaeEpochs, kVaeLearningRate, rng_);
    measure_.vae = &vae_;
  }
  memory_.threshold =
      compute_threshold(memory_.samples, memory_.centroid, measure_, cfg_.alpha, cfg_.quantile_p);
  phase_ = Phase::Detecting;
}

std::optional<Detection> MocpdDetector::step(const SeriesPoint& pt) {
  if (pt.index != cursor_)
    throw std::invalid_argument("detector: out-of-order index " + std::to_string(pt.index) +
                                " (expected " + std::to_string(cursor_) + ")");
  if (!std::isfinite(pt.value)) throw std::invalid_argument("detector: non-finite value");

  double value = pt.value;
  if (filter_) value = filter_->filter(value).cleaned;

  pending_.push_back(value);
  if (pending_.size() > cfg_.window) pending_.pop_front();

  std::optional<Detection> emitted;
  const bool full = pending_.size() == cfg_.window;
  const bool on_stride = full && (cursor_ + 1 - cfg_.window) % cfg_.stride == 0;

  if (on_stride) {
    Window w = make_window();
    switch (phase_) {
      case Phase::Initialising:
      case Phase::Collecting:
        memory_.samples.push_back(std::move(w));
        ++memory_.seen_count;
        if (memory_.samples.size() >= cfg_.min_memory) finish_gathering();
        break;

      case Phase::Detecting: {
        const auto t0 = std::chrono::steady_clock::now();
        const double score = measure_.score(w.values, memory_.centroid);
        const bool change = score > memory_.threshold;
        const auto t1 = std::chrono::steady_clock::now();
        decision_times_.push_back(
            std::chrono::duration<double, std::milli>(t1 - t0).count());
        trace_.push_back({cursor_, score, memory_.threshold});

        if (change) {
          emitted = Detection{cursor_, score, memory_.threshold};
          detections_.push_back(*emitted);
          memory_.reset();
          buffer_.clear();
          phase_ = Phase::Collecting;
        } else {
          buffer_.push_back(std::move(w));
          if (buffer_.size() > cfg_.buffer) {
            run_update_phase(memory_, buffer_, cfg_, measure_, rng_,
                             observer_ ? &observer_ : nullptr);
            buffer_.clear();
          }
        }
        break;
      }
    }
  }

  ++cursor_;
  return emitted;
}

StreamResult run_stream(const DetectorConfig& cfg, const std::vector<SeriesPoint>& points) {
  MocpdDetector detector(cfg);
  for (const SeriesPoint& pt : points) detector.step(pt);
  StreamResult out;
  out.detections = detector.detections();
  out.trace = detector.trace();
  out.decision_times_ms = detector.decision_times_ms();
  return out;
}

NewmaDetector::NewmaDetector(const NewmaConfig& cfg) : cfg_(cfg) {
  if (!(cfg_.lambda_fast > 0.0 && cfg_.lambda_fast < 1.0) ||
      !(cfg_.lambda_slow > 0.0 && cfg_.lambda_slow < 1.0) ||
      cfg_.lambda_fast == cfg_.lambda_slow)
    throw std::invalid_argument("newma: forgetting factors must differ and lie in (0,1)");
}

std::optional<Detection> NewmaDetector::step(const SeriesPoint& pt) {
  if (pt.index != cursor_)
    throw std::invalid_argument("newma: out-of-order index " + std::to_string(pt.index));
  if (!std::isfinite(pt.value)) throw std::invalid_argument("newma: non-finite value");

  if (!primed_) {
    fast_ = slow_ = pt.value;
    primed_ = true;
  } else {
    fast_ = (1.0 - cfg_.lambda_fast) * fast_ + cfg_.lambda_fast * pt.value;
    slow_ = (1.0 - cfg_.lambda_slow) * slow_ + cfg_.lambda_slow * pt.value;
  }
  stat_ = std::abs(fast_ - slow_);

  const bool armed = history_.size() >= cfg_.min_history;
  double threshold = std::numeric_limits<double>::infinity();
  if (armed) {
    const double mean = mean_of(history_);
    threshold = mean + cfg_.scale_c * stddev_of(history_, mean);
  }
  trace_.push_back({cursor_, stat_, threshold});

  std::optional<Detection> emitted;
  if (armed && stat_ > threshold) {
    emitted = Detection{cursor_, stat_, threshold};
    detections_.push_back(*emitted);
    // Reset: re-anchor both averages on the current value and forget the
    // statistic history.
    fast_ = slow_ = pt.value;
    stat_ = 0.0;
    history_.clear();
  } else {
    history_.push_back(stat_);
    if (history_.size() > cfg_.stat_window) history_.pop_front();
  }

  ++cursor_;
  return emitted;
}

StreamResult run_newma_stream(const NewmaConfig& cfg, const std::vector<SeriesPoint>& points) {
  NewmaDetector detector(cfg);
  StreamResult out;
  for (const SeriesPoint& pt : points) {
    const auto t0 = std::chrono::steady_clock::now();
    detector.step(pt);
    const auto t1 = std::chrono::steady_clock::now();
    out.decision_times_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  out.detections = detector.detections();
  out.trace = detector.trace();
  return out;
}

}  // namespace mocpd
