#include "mocpd/ssa.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace mocpd {

namespace {

constexpr std::size_t kImputeWindow = 10;
constexpr std::size_t kMinResiduals = 10;

bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

std::vector<double> ssa_reconstruct(const std::vector<double>& history,
                                    std::size_t embed_len, std::size_t rank) {
  const std::size_t n = history.size();
  if (embed_len < 2) throw std::invalid_argument("ssa: embed_len must be >= 2");
  if (n < 2 * embed_len) throw std::invalid_argument("ssa: history shorter than 2 * embed_len");
  if (rank < 1) throw std::invalid_argument("ssa: rank must be >= 1");
  if (!all_finite(history)) throw std::invalid_argument("ssa: non-finite input");

  const std::size_t L = embed_len;
  const std::size_t K = n - L + 1;

  Eigen::MatrixXd traj(L, K);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t i = 0; i < L; ++i) traj(i, j) = history[i + j];

  // Left singular vectors via the L x L Gram matrix; far cheaper than a
  // full SVD of the L x K trajectory and exact for the leading components.
  const Eigen::MatrixXd gram = traj * traj.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("ssa: eigendecomposition failed");

  // Eigenvalues ascend; walk from the top, clamping at the numeric rank.
  const double top = eig.eigenvalues()(static_cast<Eigen::Index>(L) - 1);
  const double tol = top * 1e-24;
  std::size_t kept = 0;
  Eigen::MatrixXd basis(L, std::min(rank, L));
  for (std::size_t c = 0; c < std::min(rank, L); ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(L - 1 - c);
    if (!(eig.eigenvalues()(col) > tol)) break;
    basis.col(static_cast<Eigen::Index>(kept)) = eig.eigenvectors().col(col);
    ++kept;
  }

  std::vector<double> out(n, 0.0);
  if (kept == 0) return out;  // zero series reconstructs to zero

  basis.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(kept));
  const Eigen::MatrixXd recon = basis * (basis.transpose() * traj);

  // Diagonal (Hankel) averaging back to a series.
  std::vector<int> counts(n, 0);
  for (std::size_t j = 0; j < K; ++j) {
    for (std::size_t i = 0; i < L; ++i) {
      out[i + j] += recon(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      ++counts[i + j];
    }
  }
  for (std::size_t t = 0; t < n; ++t) out[t] /= counts[t];
  return out;
}

SsaFilter::SsaFilter(const SsaConfig& cfg) : cfg_(cfg) {
  if (cfg_.embed_len < 2 || cfg_.embed_len * 2 > cfg_.history_len)
    throw std::invalid_argument("ssa filter: need 2 <= embed_len <= history_len / 2");
  if (cfg_.rank < 1 || cfg_.rank > cfg_.embed_len)
    throw std::invalid_argument("ssa filter: need 1 <= rank <= embed_len");
  history_.reserve(cfg_.history_len);
  residuals_.assign(cfg_.history_len, 0.0);
}

void SsaFilter::push_recent(double v) {
  recent_.push_back(v);
  if (recent_.size() > kImputeWindow) recent_.pop_front();
}

void SsaFilter::push_residual(double r) {
  residuals_[resid_next_] = r;
  resid_next_ = (resid_next_ + 1) % cfg_.history_len;
  if (resid_next_ == 0) resid_full_ = true;
}

std::size_t SsaFilter::residual_count() const {
  return resid_full_ ? cfg_.history_len : resid_next_;
}

double SsaFilter::residual_stddev() const {
  const std::size_t n = residual_count();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += residuals_[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = residuals_[i] - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

FilterResult SsaFilter::filter(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("ssa filter: non-finite input");

  // Warm-up: pass through until the history ring is full.
  if (history_.size() < cfg_.history_len) {
    history_.push_back(x);
    push_recent(x);
    return {x, false};
  }

  const std::vector<double> recon = ssa_reconstruct(history_, cfg_.embed_len, cfg_.rank);
  const double residual = x - recon.back();

  double scale = 0.0;
  for (double h : history_) scale = std::max(scale, std::abs(h));
  const double threshold = cfg_.resid_threshold_k * residual_stddev() + 1e-9 * (1.0 + scale);

  // Zero cleaned predecessors would mean nothing to impute from; that can
  // only happen pre-warm-up, where values pass through anyway.
  const bool flagged = residual_count() >= kMinResiduals && std::abs(residual) > threshold &&
                       !recent_.empty();
  push_residual(residual);

  double cleaned = x;
  if (flagged) {
    double imputed = 0.0;
    for (double v : recent_) imputed += v;
    cleaned = imputed / static_cast<double>(recent_.size());
  }

  history_.erase(history_.begin());
  history_.push_back(cleaned);
  push_recent(cleaned);
  return {cleaned, flagged};
}

}  // namespace mocpd
