#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "mocpd/rng.hpp"
#include "mocpd/types.hpp"

namespace mocpd {

// Squared difference of arithmetic means. Throws on length mismatch or
// non-finite input.
double mean_score(const std::vector<double>& window, const std::vector<double>& centroid);

// Biased (V-statistic) squared maximum mean discrepancy between the two
// vectors' entries treated as samples of 1-D distributions, RBF kernel
// k(x,y) = exp(-(x-y)^2 / (2 sigma^2)). The raw variant may dip a hair
// below zero from rounding; mmd_score clamps it at 0.
double mmd_score_raw(const std::vector<double>& window, const std::vector<double>& centroid,
                     double bandwidth);
double mmd_score(const std::vector<double>& window, const std::vector<double>& centroid,
                 double bandwidth);

// Median heuristic: median absolute pairwise gap over (at most 200
// randomly subsampled) scalars pooled from the windows, floored at 1e-6.
// Requires at least two pooled values.
double median_bandwidth(const std::vector<Window>& samples, Rng& rng);

// Variational autoencoder over raw windows: input -> 4 (ELU) -> latent
// mean / log-variance heads, and the mirror decoder with a unit-variance
// Gaussian output. Small enough to train full-batch in microseconds.
struct VaeGradients;

struct VaeModel {
  Eigen::MatrixXd enc_w1;     // 4 x w
  Eigen::VectorXd enc_b1;     // 4
  Eigen::MatrixXd enc_mu_w;   // z x 4
  Eigen::VectorXd enc_mu_b;   // z
  Eigen::MatrixXd enc_lv_w;   // z x 4
  Eigen::VectorXd enc_lv_b;   // z
  Eigen::MatrixXd dec_w1;     // 4 x z
  Eigen::VectorXd dec_b1;     // 4
  Eigen::MatrixXd dec_out_w;  // w x 4
  Eigen::VectorXd dec_out_b;  // w

  std::size_t input_len = 0;
  std::size_t latent = 2;
  bool trained = false;
  std::vector<double> loss_history;  // one entry per training epoch

  static VaeModel init(std::size_t input_len, std::size_t latent, Rng& rng);

  // Deterministic encoder mean; no sampling involved.
  Eigen::VectorXd encode_mean(const std::vector<double>& x) const;
  Eigen::VectorXd reconstruct_mean(const std::vector<double>& x) const;

  // Full-batch loss (KL to the unit Gaussian prior plus 0.5 * squared
  // reconstruction error, averaged over columns) for a fixed noise draw,
  // with optional parameter gradients. Exposed so gradients can be
  // verified against finite differences.
  double loss_and_gradients(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& noise,
                            VaeGradients* grads) const;
};

struct VaeGradients {
  Eigen::MatrixXd enc_w1, enc_mu_w, enc_lv_w, dec_w1, dec_out_w;
  Eigen::VectorXd enc_b1, enc_mu_b, enc_lv_b, dec_b1, dec_out_b;

  explicit VaeGradients(const VaeModel& shape);
  void set_zero();
};

// Trains in place with RMSprop (decay 0.9, epsilon 1e-8), full batch, one
// reparameterisation draw per sample per epoch. Throws if fewer than two
// samples are given or the loss turns non-finite.
void vae_train(VaeModel& model, const std::vector<Window>& samples, std::size_t epochs,
               double learning_rate, Rng& rng);

// Squared distance between the encoder means of the two inputs. The model
// must be trained.
double vae_score(const std::vector<double>& window, const std::vector<double>& centroid,
                 const VaeModel& model);

// Dissimilarity estimator with its runtime state: the active MMD bandwidth
// and, for the VAE measure, the model it scores with.
struct Measure {
  MeasureKind kind = MeasureKind::Mmd;
  double bandwidth = 1.0;
  bool auto_bandwidth = true;
  const VaeModel* vae = nullptr;

  double score(const std::vector<double>& window, const std::vector<double>& centroid) const;

  // Recomputes the median-heuristic bandwidth from the given samples;
  // no-op for fixed bandwidths and non-MMD measures.
  void refresh_bandwidth(const std::vector<Window>& samples, Rng& rng);
};

}  // namespace mocpd
