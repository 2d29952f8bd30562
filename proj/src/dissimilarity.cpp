#include "mocpd/dissimilarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mocpd {

namespace {

void check_pair(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dissimilarity: length mismatch");
  for (double x : a)
    if (!std::isfinite(x)) throw std::invalid_argument("dissimilarity: non-finite input");
  for (double x : b)
    if (!std::isfinite(x)) throw std::invalid_argument("dissimilarity: non-finite input");
}

double kernel_mean(const std::vector<double>& u, const std::vector<double>& v,
                   double inv_two_sigma_sq) {
  Eigen::ArrayXXd diff(u.size(), v.size());
  for (std::size_t j = 0; j < v.size(); ++j)
    for (std::size_t i = 0; i < u.size(); ++i)
      diff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u[i] - v[j];
  return (-(diff * diff) * inv_two_sigma_sq).exp().mean();
}

Eigen::ArrayXXd elu(const Eigen::ArrayXXd& x) {
  return (x > 0.0).select(x, x.exp() - 1.0);
}

Eigen::ArrayXXd elu_prime(const Eigen::ArrayXXd& x) {
  return (x > 0.0).select(Eigen::ArrayXXd::Ones(x.rows(), x.cols()), x.exp());
}

}  // namespace

double mean_score(const std::vector<double>& window, const std::vector<double>& centroid) {
  check_pair(window, centroid);
  if (window.empty()) throw std::invalid_argument("mean_score: empty input");
  double ma = 0.0, mb = 0.0;
  for (double x : window) ma += x;
  for (double x : centroid) mb += x;
  ma /= static_cast<double>(window.size());
  mb /= static_cast<double>(centroid.size());
  const double d = ma - mb;
  return d * d;
}

double mmd_score_raw(const std::vector<double>& window, const std::vector<double>& centroid,
                     double bandwidth) {
  check_pair(window, centroid);
  if (window.empty()) throw std::invalid_argument("mmd_score: empty input");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("mmd_score: bandwidth must be > 0");
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  return kernel_mean(window, window, inv) - 2.0 * kernel_mean(window, centroid, inv) +
         kernel_mean(centroid, centroid, inv);
}

double mmd_score(const std::vector<double>& window, const std::vector<double>& centroid,
                 double bandwidth) {
  return std::max(0.0, mmd_score_raw(window, centroid, bandwidth));
}

double median_bandwidth(const std::vector<Window>& samples, Rng& rng) {
  std::vector<double> pool;
  for (const Window& w : samples) pool.insert(pool.end(), w.values.begin(), w.values.end());
  if (pool.size() < 2) throw std::invalid_argument("median_bandwidth: need at least 2 values");

  constexpr std::size_t kMaxPool = 200;
  if (pool.size() > kMaxPool) {
    std::vector<double> sub;
    sub.reserve(kMaxPool);
    for (std::size_t i : sample_indices(pool.size(), kMaxPool, rng)) sub.push_back(pool[i]);
    pool.swap(sub);
  }

  std::vector<double> gaps;
  gaps.reserve(pool.size() * (pool.size() - 1) / 2);
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = i + 1; j < pool.size(); ++j) gaps.push_back(std::abs(pool[i] - pool[j]));

  std::sort(gaps.begin(), gaps.end());
  const std::size_t n = gaps.size();
  const double median = (n % 2 == 1) ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
  return std::max(median, 1e-6);
}

VaeGradients::VaeGradients(const VaeModel& shape)
    : enc_w1(shape.enc_w1.rows(), shape.enc_w1.cols()),
      enc_mu_w(shape.enc_mu_w.rows(), shape.enc_mu_w.cols()),
      enc_lv_w(shape.enc_lv_w.rows(), shape.enc_lv_w.cols()),
      dec_w1(shape.dec_w1.rows(), shape.dec_w1.cols()),
      dec_out_w(shape.dec_out_w.rows(), shape.dec_out_w.cols()),
      enc_b1(shape.enc_b1.size()),
      enc_mu_b(shape.enc_mu_b.size()),
      enc_lv_b(shape.enc_lv_b.size()),
      dec_b1(shape.dec_b1.size()),
      dec_out_b(shape.dec_out_b.size()) {
  set_zero();
}

void VaeGradients::set_zero() {
  enc_w1.setZero();
  enc_mu_w.setZero();
  enc_lv_w.setZero();
  dec_w1.setZero();
  dec_out_w.setZero();
  enc_b1.setZero();
  enc_mu_b.setZero();
  enc_lv_b.setZero();
  dec_b1.setZero();
  dec_out_b.setZero();
}

VaeModel VaeModel::init(std::size_t input_len, std::size_t latent, Rng& rng) {
  constexpr std::size_t kHidden = 4;
  VaeModel m;
  m.input_len = input_len;
  m.latent = latent;

  auto fill = [&rng](Eigen::MatrixXd& mat, std::size_t rows, std::size_t cols) {
    mat.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) mat(r, c) = scale * rng.normal();
  };

  fill(m.enc_w1, kHidden, input_len);
  m.enc_b1 = Eigen::VectorXd::Zero(kHidden);
  fill(m.enc_mu_w, latent, kHidden);
  m.enc_mu_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(latent));
  fill(m.enc_lv_w, latent, kHidden);
  m.enc_lv_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(latent));
  fill(m.dec_w1, kHidden, latent);
  m.dec_b1 = Eigen::VectorXd::Zero(kHidden);
  fill(m.dec_out_w, input_len, kHidden);
  m.dec_out_b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(input_len));
  return m;
}

Eigen::VectorXd VaeModel::encode_mean(const std::vector<double>& x) const {
  if (x.size() != input_len) throw std::invalid_argument("vae: input length mismatch");
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::ArrayXd pre = (enc_w1 * xv + enc_b1).array();
  const Eigen::VectorXd h = elu(pre).matrix();
  return enc_mu_w * h + enc_mu_b;
}

Eigen::VectorXd VaeModel::reconstruct_mean(const std::vector<double>& x) const {
  const Eigen::VectorXd z = encode_mean(x);
  const Eigen::VectorXd h = elu((dec_w1 * z + dec_b1).array()).matrix();
  return dec_out_w * h + dec_out_b;
}

double VaeModel::loss_and_gradients(const Eigen::MatrixXd& batch, const Eigen::MatrixXd& noise,
                                    VaeGradients* grads) const {
  const Eigen::Index bsz = batch.cols();
  const double inv_b = 1.0 / static_cast<double>(bsz);

  // Forward
  const Eigen::ArrayXXd pre1 = ((enc_w1 * batch).colwise() + enc_b1).array();
  const Eigen::MatrixXd h1 = elu(pre1).matrix();
  const Eigen::MatrixXd mu = (enc_mu_w * h1).colwise() + enc_mu_b;
  const Eigen::MatrixXd lv = (enc_lv_w * h1).colwise() + enc_lv_b;
  const Eigen::ArrayXXd sigma = (0.5 * lv.array()).exp();
  const Eigen::MatrixXd zs = mu + (sigma * noise.array()).matrix();
  const Eigen::ArrayXXd pre2 = ((dec_w1 * zs).colwise() + dec_b1).array();
  const Eigen::MatrixXd h2 = elu(pre2).matrix();
  const Eigen::MatrixXd xhat = (dec_out_w * h2).colwise() + dec_out_b;

  const double rec = 0.5 * (xhat - batch).squaredNorm();
  const double kl =
      0.5 * (mu.array().square() + lv.array().exp() - 1.0 - lv.array()).sum();
  const double loss = (rec + kl) * inv_b;

  if (grads != nullptr) {
    const Eigen::MatrixXd d_xhat = (xhat - batch) * inv_b;
    const Eigen::MatrixXd d_pre2 =
        ((dec_out_w.transpose() * d_xhat).array() * elu_prime(pre2)).matrix();
    grads->dec_out_w = d_xhat * h2.transpose();
    grads->dec_out_b = d_xhat.rowwise().sum();
    grads->dec_w1 = d_pre2 * zs.transpose();
    grads->dec_b1 = d_pre2.rowwise().sum();

    const Eigen::MatrixXd d_z = dec_w1.transpose() * d_pre2;
    const Eigen::MatrixXd d_mu = d_z + mu * inv_b;
    const Eigen::MatrixXd d_lv =
        (d_z.array() * noise.array() * 0.5 * sigma +
         0.5 * (lv.array().exp() - 1.0) * inv_b)
            .matrix();

    grads->enc_mu_w = d_mu * h1.transpose();
    grads->enc_mu_b = d_mu.rowwise().sum();
    grads->enc_lv_w = d_lv * h1.transpose();
    grads->enc_lv_b = d_lv.rowwise().sum();

    const Eigen::MatrixXd d_pre1 =
        ((enc_mu_w.transpose() * d_mu + enc_lv_w.transpose() * d_lv).array() * elu_prime(pre1))
            .matrix();
    grads->enc_w1 = d_pre1 * batch.transpose();
    grads->enc_b1 = d_pre1.rowwise().sum();
  }
  return loss;
}

void vae_train(VaeModel& model, const std::vector<Window>& samples, std::size_t epochs,
               double learning_rate, Rng& rng) {
  if (samples.size() < 2) throw std::invalid_argument("vae_train: need at least 2 samples");
  for (const Window& w : samples)
    if (w.values.size() != model.input_len)
      throw std::invalid_argument("vae_train: window length mismatch");

  const Eigen::Index bsz = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd batch(static_cast<Eigen::Index>(model.input_len), bsz);
  for (Eigen::Index c = 0; c < bsz; ++c)
    for (Eigen::Index r = 0; r < batch.rows(); ++r)
      batch(r, c) = samples[static_cast<std::size_t>(c)].values[static_cast<std::size_t>(r)];

  VaeGradients g(model);
  VaeGradients cache(model);
  Eigen::MatrixXd noise(static_cast<Eigen::Index>(model.latent), bsz);

  constexpr double kDecay = 0.9;
  constexpr double kEps = 1e-8;
  auto rmsprop = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& vel) {
    vel = kDecay * vel.array() + (1.0 - kDecay) * grad.array().square();
    param.array() -= learning_rate * grad.array() / (vel.array().sqrt() + kEps);
  };
  auto rmsprop_v = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad, Eigen::VectorXd& vel) {
    vel = kDecay * vel.array() + (1.0 - kDecay) * grad.array().square();
    param.array() -= learning_rate * grad.array() / (vel.array().sqrt() + kEps);
  };

  model.loss_history.clear();
  model.loss_history.reserve(epochs);
  for (std::size_t e = 0; e < epochs; ++e) {
    for (Eigen::Index c = 0; c < bsz; ++c)
      for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = rng.normal();

    const double loss = model.loss_and_gradients(batch, noise, &g);
    if (!std::isfinite(loss)) throw std::runtime_error("vae_train: training diverged");
    model.loss_history.push_back(loss);

    rmsprop(model.enc_w1, g.enc_w1, cache.enc_w1);
    rmsprop_v(model.enc_b1, g.enc_b1, cache.enc_b1);
    rmsprop(model.enc_mu_w, g.enc_mu_w, cache.enc_mu_w);
    rmsprop_v(model.enc_mu_b, g.enc_mu_b, cache.enc_mu_b);
    rmsprop(model.enc_lv_w, g.enc_lv_w, cache.enc_lv_w);
    rmsprop_v(model.enc_lv_b, g.enc_lv_b, cache.enc_lv_b);
    rmsprop(model.dec_w1, g.dec_w1, cache.dec_w1);
    rmsprop_v(model.dec_b1, g.dec_b1, cache.dec_b1);
    rmsprop(model.dec_out_w, g.dec_out_w, cache.dec_out_w);
    rmsprop_v(model.dec_out_b, g.dec_out_b, cache.dec_out_b);
  }
  model.trained = true;
}

double vae_score(const std::vector<double>& window, const std::vector<double>& centroid,
                 const VaeModel& model) {
  check_pair(window, centroid);
  if (!model.trained) throw std::logic_error("vae_score: model not trained");
  return (model.encode_mean(window) - model.encode_mean(centroid)).squaredNorm();
}

double Measure::score(const std::vector<double>& window,
                      const std::vector<double>& centroid) const {
  switch (kind) {
    case MeasureKind::Mean: return mean_score(window, centroid);
    case MeasureKind::Mmd: return mmd_score(window, centroid, bandwidth);
    case MeasureKind::Vae:
      if (vae == nullptr) throw std::logic_error("measure: no VAE model attached");
      return vae_score(window, centroid, *vae);
  }
  throw std::logic_error("measure: unknown kind");
}

void Measure::refresh_bandwidth(const std::vector<Window>& samples, Rng& rng) {
  if (kind != MeasureKind::Mmd || !auto_bandwidth || samples.empty()) return;
  bandwidth = median_bandwidth(samples, rng);
}

}  // namespace mocpd
