#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace mocpd {

// Rank-truncated singular spectrum reconstruction of `history`. Builds the
// embed_len x (N - embed_len + 1) trajectory matrix, keeps the leading
// `rank` singular components and diagonal-averages back to a length-N
// series. A rank above the numeric rank of the trajectory matrix is
// clamped, not an error. Throws on non-finite input or when
// history.size() < 2 * embed_len.
std::vector<double> ssa_reconstruct(const std::vector<double>& history,
                                    std::size_t embed_len, std::size_t rank);

struct SsaConfig {
  std::size_t history_len = 100;   // N: rolling window the SSA model sees
  std::size_t embed_len = 20;      // L: trajectory embedding, 2 <= L <= N/2
  std::size_t rank = 3;            // leading components kept
  double resid_threshold_k = 3.0;  // flag residuals beyond k rolling stddevs
};

struct FilterResult {
  double cleaned = 0.0;
  bool was_outlier = false;
};

// Streaming outlier filter. Once the rolling history is warm, each new
// point is compared against the final element of the SSA reconstruction
// of that history (which deliberately excludes the point itself, so a
// spike cannot explain itself away); residuals beyond k rolling standard
// deviations are flagged. Flagged points are replaced by the mean of the
// previous (up to) 10 cleaned values, and only cleaned values enter the
// history. Raw residuals of flagged points still enter the rolling scale
// estimate, so a persistent level shift unmasks itself after a handful
// of samples instead of being imputed forever.
class SsaFilter {
 public:
  explicit SsaFilter(const SsaConfig& cfg = {});

  FilterResult filter(double x);

  bool warmed_up() const { return history_.size() >= cfg_.history_len; }
  const SsaConfig& config() const { return cfg_; }

 private:
  SsaConfig cfg_;
  std::vector<double> history_;    // cleaned values, oldest first
  std::vector<double> residuals_;  // raw residual ring
  std::size_t resid_next_ = 0;
  bool resid_full_ = false;
  std::deque<double> recent_;      // last <= 10 cleaned outputs

  void push_recent(double v);
  void push_residual(double r);
  double residual_stddev() const;
  std::size_t residual_count() const;
};

}  // namespace mocpd
