#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "seqcal/gp.hpp"
#include "seqcal/rng.hpp"

using namespace seqcal;

namespace {

// Independent kernel oracle: per-dimension Matern-1.5 factors multiplied out,
// no shared code with the library's matrix-based path.
double kernel_oracle(const std::vector<double>& a, const std::vector<double>& b,
                     const KernelParams& params) {
  double value = params.scale;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const double d = std::fabs(a[l] - b[l]) * std::exp(params.log_lengthscales[l]);
    value *= (1.0 + d) * std::exp(-d);
  }
  return value;
}

struct DenseOracle {
  Eigen::MatrixXd Kinv;
  std::vector<Sample> data;
  KernelParams params;
  double center;

  explicit DenseOracle(const std::vector<Sample>& samples, const KernelParams& p, double c)
      : data(samples), params(p), center(c) {
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        K(i, j) = kernel_oracle(samples[i].theta, samples[j].theta, params);
    K.diagonal().array() += params.nugget;
    Kinv = K.fullPivLu().inverse();
  }

  Eigen::VectorXd kvec(const std::vector<double>& theta) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(data.size()));
    for (Eigen::Index i = 0; i < k.size(); ++i)
      k(i) = kernel_oracle(data[static_cast<std::size_t>(i)].theta, theta, params);
    return k;
  }

  double mean(const std::vector<double>& theta) const {
    Eigen::VectorXd yc(static_cast<Eigen::Index>(data.size()));
    for (Eigen::Index i = 0; i < yc.size(); ++i)
      yc(i) = data[static_cast<std::size_t>(i)].output - center;
    return center + kvec(theta).dot(Kinv * yc);
  }

  double var(const std::vector<double>& theta) const {
    const Eigen::VectorXd k = kvec(theta);
    return params.scale - k.dot(Kinv * k);
  }

  double cov(const std::vector<double>& a, const std::vector<double>& b) const {
    return kernel_oracle(a, b, params) - kvec(a).dot(Kinv * kvec(b));
  }
};

std::vector<Sample> random_instance(RandomStream& rng, std::size_t n) {
  std::vector<Sample> data;
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> theta{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double output = std::sin(theta[0]) + 0.5 * theta[1] * theta[1] + 0.1 * rng.normal();
    data.push_back({theta, output});
  }
  return data;
}

KernelParams random_params(RandomStream& rng) {
  KernelParams params;
  params.log_lengthscales = {rng.uniform(-1.5, 0.5), rng.uniform(-1.5, 0.5)};
  params.scale = rng.uniform(0.5, 2.0);
  params.nugget = rng.uniform(1e-6, 1e-3);
  return params;
}

}  // namespace

TEST_CASE("matern correlation basics") {
  const std::vector<double> zeta{0.3, -0.7};
  const std::vector<double> a{0.5, -1.0}, b{1.5, 2.0};
  CHECK(matern_correlation(a, a, zeta) == doctest::Approx(1.0));
  CHECK(matern_correlation(a, b, zeta) == doctest::Approx(matern_correlation(b, a, zeta)));
  CHECK(matern_correlation(a, b, zeta) <= 1.0);
  CHECK(matern_correlation(a, b, zeta) > 0.0);
  CHECK_THROWS_AS(matern_correlation(a, {1.0}, zeta), std::invalid_argument);

  KernelParams params;
  params.log_lengthscales = zeta;
  params.scale = 1.0;
  params.nugget = 0.0;
  CHECK(matern_correlation(a, b, zeta) == doctest::Approx(kernel_oracle(a, b, params)));
}

TEST_CASE("predictions match a dense brute-force solve on random instances") {
  RandomStream rng(2024);
  const double tol = 1e-10;  // pinned
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = 3 + rng.index(8);  // up to 10
    const auto data = random_instance(rng, n);
    const auto params = random_params(rng);
    double center = 0.0;
    for (const auto& s : data) center += s.output;
    center /= static_cast<double>(n);

    const GpPosterior gp = GpPosterior::with_params(data, params, center);
    const DenseOracle oracle(data, params, center);

    for (int q = 0; q < 5; ++q) {
      const std::vector<double> theta{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      const std::vector<double> other{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      const Prediction pred = gp.predict(theta);
      const double m = oracle.mean(theta);
      const double v = oracle.var(theta);
      CHECK(std::fabs(pred.mean - m) <= tol * std::max(1.0, std::fabs(m)));
      CHECK(std::fabs(pred.var - v) <= tol * std::max(1.0, std::fabs(v)));
      const double c = oracle.cov(theta, other);
      CHECK(std::fabs(gp.posterior_cov(theta, other) - c) <= tol * std::max(1.0, std::fabs(c)));
    }
  }
}

TEST_CASE("predict_many agrees with predict") {
  RandomStream rng(55);
  const auto data = random_instance(rng, 8);
  const auto params = random_params(rng);
  const GpPosterior gp = GpPosterior::with_params(data, params, 0.25);

  Eigen::MatrixXd X(6, 2);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = rng.uniform(-3.0, 3.0);
    X(i, 1) = rng.uniform(-3.0, 3.0);
  }
  Eigen::VectorXd mean, var;
  gp.predict_many(X, mean, var);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Prediction p = gp.predict({X(i, 0), X(i, 1)});
    CHECK(mean(i) == doctest::Approx(p.mean).epsilon(1e-12));
    CHECK(var(i) == doctest::Approx(p.var).epsilon(1e-12));
  }
}

TEST_CASE("interpolation and prior reversion limits") {
  std::vector<Sample> data{
      {{-1.0, 0.0}, 2.0}, {{0.5, 1.0}, -1.0}, {{2.0, -2.0}, 0.5}, {{-2.5, 2.5}, 1.5}};
  KernelParams params;
  params.log_lengthscales = {0.0, 0.0};
  params.scale = 1.7;
  params.nugget = 1e-10;
  const GpPosterior gp = GpPosterior::with_params(data, params, 0.75);

  for (const auto& s : data) {
    const Prediction p = gp.predict(s.theta);
    CHECK(p.mean == doctest::Approx(s.output).epsilon(1e-6));
    CHECK(p.var >= 0.0);
    CHECK(p.var < 1e-6);
  }

  const Prediction far = gp.predict({500.0, -500.0});
  CHECK(far.mean == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(far.var == doctest::Approx(params.scale).epsilon(1e-9));
}

TEST_CASE("posterior covariance obeys Cauchy-Schwarz and tau_sq matches its definition") {
  RandomStream rng(77);
  const auto data = random_instance(rng, 9);
  const auto params = random_params(rng);
  const GpPosterior gp = GpPosterior::with_params(data, params, 0.0);

  for (int q = 0; q < 30; ++q) {
    const std::vector<double> a{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const std::vector<double> b{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const double cov = gp.posterior_cov(a, b);
    const double va = gp.predict(a).var;
    const double vb = gp.predict(b).var;
    CHECK(cov * cov <= va * vb * (1.0 + 1e-9) + 1e-15);

    const double expect = cov * cov / (vb + params.nugget);
    CHECK(gp.tau_sq(a, b) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("conditioning on more data never inflates predictive variance") {
  RandomStream rng(91);
  auto data = random_instance(rng, 10);
  const auto params = random_params(rng);
  const std::vector<Sample> subset(data.begin(), data.begin() + 6);

  const GpPosterior small = GpPosterior::with_params(subset, params, 0.0);
  const GpPosterior big = GpPosterior::with_params(data, params, 0.0);
  for (int q = 0; q < 25; ++q) {
    const std::vector<double> theta{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    CHECK(big.predict(theta).var <= small.predict(theta).var + 1e-9);
  }
}

TEST_CASE("log marginal likelihood gradient matches central differences") {
  RandomStream rng(31);
  const auto data = random_instance(rng, 8);
  Eigen::MatrixXd X(8, 2);
  Eigen::VectorXd y(8);
  for (Eigen::Index i = 0; i < 8; ++i) {
    X(i, 0) = data[static_cast<std::size_t>(i)].theta[0];
    X(i, 1) = data[static_cast<std::size_t>(i)].theta[1];
    y(i) = data[static_cast<std::size_t>(i)].output;
  }
  const Eigen::VectorXd yc = y.array() - y.mean();

  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd phi(4);
    phi << rng.uniform(-1.0, 0.5), rng.uniform(-1.0, 0.5), rng.uniform(-0.5, 0.5),
        rng.uniform(-7.0, -3.0);
    const LmlResult at = log_marginal_likelihood(X, yc, phi);
    REQUIRE(at.ok);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < 4; ++i) {
      Eigen::VectorXd hi = phi, lo = phi;
      hi(i) += h;
      lo(i) -= h;
      const LmlResult up = log_marginal_likelihood(X, yc, hi);
      const LmlResult dn = log_marginal_likelihood(X, yc, lo);
      REQUIRE(up.ok);
      REQUIRE(dn.ok);
      const double fd = (up.value - dn.value) / (2.0 * h);
      CHECK(at.grad(i) == doctest::Approx(fd).epsilon(1e-4));
    }
  }
}

TEST_CASE("fit is deterministic, improves on its base start, and accepts a warm start") {
  RandomStream rng(8);
  std::vector<Sample> data;
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> theta{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    data.push_back({theta, std::sin(theta[0]) * std::cos(theta[1])});
  }

  FitConfig config;
  config.seed = 5;
  const GpPosterior a = GpPosterior::fit(data, config);
  const GpPosterior b = GpPosterior::fit(data, config);
  CHECK(a.params().scale == b.params().scale);
  CHECK(a.params().nugget == b.params().nugget);
  CHECK(a.params().log_lengthscales == b.params().log_lengthscales);

  // Fitted emulator interpolates a smooth function decently at a held-out spot.
  const Prediction p = a.predict({0.3, 0.3});
  CHECK(std::fabs(p.mean - std::sin(0.3) * std::cos(0.3)) < 0.3);

  FitConfig warm = config;
  warm.warm_start = a.params();
  const GpPosterior c = GpPosterior::fit(data, warm);
  CHECK(std::isfinite(c.params().scale));

  CHECK_THROWS_AS(GpPosterior::fit({data[0]}, config), std::invalid_argument);
}
