#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mocpd/dissimilarity.hpp"
#include "mocpd/rng.hpp"

using namespace mocpd;

namespace {

// Brute-force kernel-sum reference, plain double loops with std::exp.
double mmd_reference(const std::vector<double>& a, const std::vector<double>& b, double sigma) {
  auto kmean = [sigma](const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (double x : u)
      for (double y : v) s += std::exp(-(x - y) * (x - y) / (2.0 * sigma * sigma));
    return s / static_cast<double>(u.size() * v.size());
  };
  return kmean(a, a) - 2.0 * kmean(a, b) + kmean(b, b);
}

std::vector<Window> make_windows(const std::vector<std::vector<double>>& rows) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < rows.size(); ++i) out.push_back({i, rows[i]});
  return out;
}

}  // namespace

TEST_CASE("mean score is the squared gap of the means") {
  CHECK(mean_score({2, 2, 2}, {5, 5, 5}) == doctest::Approx(9.0));
  CHECK(mean_score({0, 1, 2}, {1, 1, 4}) == doctest::Approx(1.0));
  const std::vector<double> w{0.4, -1.0, 2.2};
  CHECK(mean_score(w, w) == 0.0);
  CHECK_THROWS(mean_score({1, 2}, {1, 2, 3}));
  CHECK_THROWS(mean_score({1, std::nan("")}, {1, 2}));
}

TEST_CASE("mmd of identical inputs is zero") {
  const std::vector<double> w{0.3, 1.2, -0.5, 2.0};
  CHECK(mmd_score(w, w, 1.0) == 0.0);
}

TEST_CASE("mmd single-entry case matches the closed form") {
  // 1 - 2 exp(-1/2) + 1
  const double expected = 2.0 - 2.0 * std::exp(-0.5);
  CHECK(mmd_score({0.0}, {1.0}, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(std::abs(mmd_score({0.0}, {1.0}, 1.0) - 0.78694) < 1e-5);
}

TEST_CASE("mmd matches the brute-force oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(10), b(10);
    for (double& x : a) x = rng.normal(0.0, 2.0);
    for (double& x : b) x = rng.normal(0.5, 1.0);
    const double sigma = rng.uniform(0.2, 3.0);
    CHECK(std::abs(mmd_score_raw(a, b, sigma) - mmd_reference(a, b, sigma)) < 1e-12);
  }
}

TEST_CASE("biased estimator never goes meaningfully negative") {
  Rng rng(78);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(8), b(8);
    for (double& x : a) x = rng.normal(0.0, 1.0);
    for (double& x : b) x = rng.normal(0.0, 1.0);
    const double raw = mmd_score_raw(a, b, rng.uniform(0.1, 2.0));
    CHECK(raw >= -1e-12);
    CHECK(mmd_score(a, b, 1.0) >= 0.0);
  }
}

TEST_CASE("mean and mmd are symmetric and permutation invariant") {
  Rng rng(79);
  std::vector<double> a(12), b(12);
  for (double& x : a) x = rng.normal(0.0, 1.0);
  for (double& x : b) x = rng.normal(1.0, 0.5);

  CHECK(mean_score(a, b) == doctest::Approx(mean_score(b, a)).epsilon(1e-14));
  CHECK(mmd_score(a, b, 0.8) == doctest::Approx(mmd_score(b, a, 0.8)).epsilon(1e-14));

  std::vector<double> shuffled = a;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[2], shuffled[7]);
  CHECK(mean_score(shuffled, b) == doctest::Approx(mean_score(a, b)).epsilon(1e-14));
  CHECK(std::abs(mmd_score(shuffled, b, 0.8) - mmd_score(a, b, 0.8)) < 1e-12);
}

TEST_CASE("median bandwidth enumerates pairwise gaps") {
  Rng rng(80);
  CHECK(median_bandwidth(make_windows({{0.0}, {1.0}}), rng) == doctest::Approx(1.0));
  // gaps of {0,1,2,3}: {1,2,3,1,2,1} -> median 1.5
  CHECK(median_bandwidth(make_windows({{0.0, 1.0}, {2.0, 3.0}}), rng) == doctest::Approx(1.5));
  CHECK(median_bandwidth(make_windows({{4.0, 4.0}, {4.0, 4.0}}), rng) == doctest::Approx(1e-6));
  CHECK_THROWS(median_bandwidth(make_windows({{1.0}}), rng));
}

TEST_CASE("median bandwidth subsampling stays deterministic and in range") {
  Rng a(5), b(5);
  std::vector<std::vector<double>> rows;
  Rng data(6);
  for (int i = 0; i < 30; ++i) {
    std::vector<double> row(20);
    for (double& x : row) x = data.normal(0.0, 1.0);
    rows.push_back(row);
  }
  const auto windows = make_windows(rows);
  const double s1 = median_bandwidth(windows, a);
  const double s2 = median_bandwidth(windows, b);
  CHECK(s1 == s2);
  CHECK(s1 > 0.0);
}

TEST_CASE("vae training reduces reconstruction error on a trivial set") {
  Rng rng(31);
  std::vector<double> base(8);
  for (double& x : base) x = rng.normal(0.0, 1.0);
  std::vector<Window> samples;
  for (std::size_t i = 0; i < 20; ++i) samples.push_back({i, base});

  VaeModel model = VaeModel::init(8, 2, rng);
  auto recon_mse = [&](const VaeModel& m) {
    const Eigen::VectorXd xh = m.reconstruct_mean(base);
    double s = 0.0;
    for (int i = 0; i < xh.size(); ++i) s += (xh(i) - base[static_cast<std::size_t>(i)]) *
                                             (xh(i) - base[static_cast<std::size_t>(i)]);
    return s / static_cast<double>(xh.size());
  };

  const double before = recon_mse(model);
  vae_train(model, samples, 100, 0.01, rng);
  const double after = recon_mse(model);
  CHECK(model.trained);
  CHECK(after < before);
  CHECK(model.loss_history.size() == 100);
}

TEST_CASE("mean epoch loss trends down within a five percent band") {
  Rng rng(32);
  std::vector<Window> samples;
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> row(6);
    for (double& x : row) x = rng.normal(0.0, 1.0);
    samples.push_back({i, row});
  }
  VaeModel model = VaeModel::init(6, 2, rng);
  vae_train(model, samples, 100, 0.01, rng);
  const auto& loss = model.loss_history;

  // Per-epoch losses jitter with the reparameterisation draw, so compare
  // mean loss over consecutive 20-epoch spans.
  auto span_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + 20; ++i) s += loss[i];
    return s / 20.0;
  };
  for (std::size_t k = 0; k + 40 <= loss.size(); ++k)
    CHECK(span_mean(k + 20) <= span_mean(k) * 1.05 + 1e-9);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(33);
  const std::size_t w = 6, z = 2, batch_size = 3;
  VaeModel model = VaeModel::init(w, z, rng);

  Eigen::MatrixXd batch(w, batch_size);
  for (Eigen::Index c = 0; c < batch.cols(); ++c)
    for (Eigen::Index r = 0; r < batch.rows(); ++r) batch(r, c) = rng.normal(0.0, 1.0);
  Eigen::MatrixXd noise(z, batch_size);
  for (Eigen::Index c = 0; c < noise.cols(); ++c)
    for (Eigen::Index r = 0; r < noise.rows(); ++r) noise(r, c) = rng.normal();

  VaeGradients grads(model);
  model.loss_and_gradients(batch, noise, &grads);

  const double h = 1e-5;
  double max_rel = 0.0;
  auto check_matrix = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& analytic) {
    for (Eigen::Index r = 0; r < param.rows(); ++r)
      for (Eigen::Index c = 0; c < param.cols(); ++c) {
        const double saved = param(r, c);
        param(r, c) = saved + h;
        const double up = model.loss_and_gradients(batch, noise, nullptr);
        param(r, c) = saved - h;
        const double down = model.loss_and_gradients(batch, noise, nullptr);
        param(r, c) = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric) + std::abs(analytic(r, c)), 1e-6});
        max_rel = std::max(max_rel, std::abs(numeric - analytic(r, c)) / denom);
      }
  };
  auto check_vector = [&](Eigen::VectorXd& param, const Eigen::VectorXd& analytic) {
    Eigen::MatrixXd pm = param, am = analytic;
    for (Eigen::Index r = 0; r < param.size(); ++r) {
      const double saved = param(r);
      param(r) = saved + h;
      const double up = model.loss_and_gradients(batch, noise, nullptr);
      param(r) = saved - h;
      const double down = model.loss_and_gradients(batch, noise, nullptr);
      param(r) = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double denom = std::max({std::abs(numeric) + std::abs(analytic(r)), 1e-6});
      max_rel = std::max(max_rel, std::abs(numeric - analytic(r)) / denom);
    }
  };

  check_matrix(model.enc_w1, grads.enc_w1);
  check_vector(model.enc_b1, grads.enc_b1);
  check_matrix(model.enc_mu_w, grads.enc_mu_w);
  check_vector(model.enc_mu_b, grads.enc_mu_b);
  check_matrix(model.enc_lv_w, grads.enc_lv_w);
  check_vector(model.enc_lv_b, grads.enc_lv_b);
  check_matrix(model.dec_w1, grads.dec_w1);
  check_vector(model.dec_b1, grads.dec_b1);
  check_matrix(model.dec_out_w, grads.dec_out_w);
  check_vector(model.dec_out_b, grads.dec_out_b);

  CHECK(max_rel < 1e-4);
}

TEST_CASE("vae score basics") {
  Rng rng(34);
  std::vector<Window> samples;
  for (std::size_t i = 0; i < 5; ++i) {
    std::vector<double> row(6);
    for (double& x : row) x = rng.normal(0.0, 1.0);
    samples.push_back({i, row});
  }
  VaeModel model = VaeModel::init(6, 2, rng);

  const std::vector<double> probe{1, 2, 3, 4, 5, 6};
  CHECK_THROWS(vae_score(probe, probe, model));  // untrained

  vae_train(model, samples, 50, 0.01, rng);
  CHECK(vae_score(probe, probe, model) == 0.0);

  // Zeroed latent-mean head collapses every input to the same code.
  VaeModel zeroed = model;
  zeroed.enc_mu_w.setZero();
  zeroed.enc_mu_b.setZero();
  CHECK(vae_score(probe, samples[0].values, zeroed) == 0.0);
}

TEST_CASE("encoder mean matches a hand-rolled forward pass") {
  Rng rng(35);
  VaeModel model = VaeModel::init(4, 2, rng);
  model.trained = true;
  const std::vector<double> x{0.5, -1.0, 2.0, 0.25};
  const std::vector<double> y{1.5, 0.5, -0.5, 1.0};

  // Independent evaluation with scalar loops.
  auto encode = [&](const std::vector<double>& in) {
    std::vector<double> h(4, 0.0);
    for (int r = 0; r < 4; ++r) {
      double s = model.enc_b1(r);
      for (int c = 0; c < 4; ++c) s += model.enc_w1(r, c) * in[static_cast<std::size_t>(c)];
      h[static_cast<std::size_t>(r)] = s > 0 ? s : std::expm1(s);
    }
    std::vector<double> mu(2, 0.0);
    for (int r = 0; r < 2; ++r) {
      double s = model.enc_mu_b(r);
      for (int c = 0; c < 4; ++c) s += model.enc_mu_w(r, c) * h[static_cast<std::size_t>(c)];
      mu[static_cast<std::size_t>(r)] = s;
    }
    return mu;
  };

  const auto mx = encode(x);
  const auto my = encode(y);
  const double expected = (mx[0] - my[0]) * (mx[0] - my[0]) + (mx[1] - my[1]) * (mx[1] - my[1]);
  CHECK(vae_score(x, y, model) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("vae training is deterministic under a fixed seed") {
  std::vector<Window> samples;
  Rng data(36);
  for (std::size_t i = 0; i < 8; ++i) {
    std::vector<double> row(5);
    for (double& x : row) x = data.normal(0.0, 1.0);
    samples.push_back({i, row});
  }
  Rng r1(99), r2(99);
  VaeModel m1 = VaeModel::init(5, 2, r1);
  VaeModel m2 = VaeModel::init(5, 2, r2);
  vae_train(m1, samples, 60, 0.01, r1);
  vae_train(m2, samples, 60, 0.01, r2);
  CHECK(m1.enc_w1 == m2.enc_w1);
  CHECK(m1.dec_out_w == m2.dec_out_w);
  CHECK(m1.loss_history == m2.loss_history);
}

TEST_CASE("vae training aborts when the loss diverges") {
  Rng rng(37);
  std::vector<Window> samples;
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> row(5);
    for (double& x : row) x = rng.normal(0.0, 1.0);
    samples.push_back({i, row});
  }
  VaeModel model = VaeModel::init(5, 2, rng);
  CHECK_THROWS_AS(vae_train(model, samples, 100, 1e10, rng), std::runtime_error);
  VaeModel single = VaeModel::init(5, 2, rng);
  CHECK_THROWS(vae_train(single, {samples[0]}, 10, 0.01, rng));
}

TEST_CASE("measure dispatch applies the configured estimator") {
  Measure measure;
  measure.kind = MeasureKind::Mean;
  CHECK(measure.score({2, 2}, {5, 5}) == doctest::Approx(9.0));

  measure.kind = MeasureKind::Mmd;
  measure.bandwidth = 1.0;
  CHECK(measure.score({0.0}, {1.0}) == doctest::Approx(2.0 - 2.0 * std::exp(-0.5)));

  measure.kind = MeasureKind::Vae;
  measure.vae = nullptr;
  CHECK_THROWS(measure.score({1.0}, {1.0}));
}

TEST_CASE("bandwidth refresh only touches auto mmd") {
  Rng rng(38);
  const auto windows = make_windows({{0.0, 1.0}, {2.0, 3.0}});

  Measure fixed;
  fixed.kind = MeasureKind::Mmd;
  fixed.bandwidth = 2.5;
  fixed.auto_bandwidth = false;
  fixed.refresh_bandwidth(windows, rng);
  CHECK(fixed.bandwidth == 2.5);

  Measure automatic;
  automatic.kind = MeasureKind::Mmd;
  automatic.auto_bandwidth = true;
  automatic.refresh_bandwidth(windows, rng);
  CHECK(automatic.bandwidth == doctest::Approx(1.5));

  Measure mean;
  mean.kind = MeasureKind::Mean;
  mean.bandwidth = 1.0;
  mean.refresh_bandwidth(windows, rng);
  CHECK(mean.bandwidth == 1.0);
}
