#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "seqcal/problem.hpp"
#include "seqcal/rng.hpp"
#include "seqcal/stats.hpp"
#include "seqcal/testbed.hpp"

using namespace seqcal;

TEST_CASE("derive_seed is deterministic and separates streams") {
  CHECK(derive_seed(7u, 1u, 2u) == derive_seed(7u, 1u, 2u));
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 16; ++a)
    for (std::uint64_t b = 0; b < 16; ++b) seen.insert(derive_seed(42u, a, b));
  CHECK(seen.size() == 256);
  CHECK(derive_seed(1u, 2u) != derive_seed(2u, 1u));
}

TEST_CASE("counter-based variates are pure functions of their counters") {
  CHECK(counter_uniform(5u, 3u, 9u) == counter_uniform(5u, 3u, 9u));
  CHECK(counter_normal(5u, 3u, 9u) == counter_normal(5u, 3u, 9u));
  CHECK(counter_uniform(5u, 3u, 9u) != counter_uniform(5u, 3u, 10u));
  for (std::uint64_t j = 0; j < 1000; ++j) {
    const double u = counter_uniform(11u, j);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(std::isfinite(counter_normal(11u, j)));
  }
}

TEST_CASE("counter_normal has roughly standard moments") {
  double sum = 0.0, sumsq = 0.0;
  const int n = 20000;
  for (int j = 0; j < n; ++j) {
    const double z = counter_normal(123u, static_cast<std::uint64_t>(j));
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.03);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("RandomStream reproduces per seed") {
  RandomStream a(99), b(99), c(100);
  bool all_equal = true, any_differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    all_equal = all_equal && x == b.uniform();
    any_differs = any_differs || x != c.uniform();
  }
  CHECK(all_equal);
  CHECK(any_differs);
  RandomStream d(7);
  for (int i = 0; i < 100; ++i) {
    const double x = d.uniform(-2.0, 3.0);
    CHECK(x >= -2.0);
    CHECK(x < 3.0);
    CHECK(d.index(10) < 10);
  }
}

TEST_CASE("normal pdf and cdf agree with known values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-9));
  CHECK(normal_cdf(-3.0) + normal_cdf(3.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  // gaussian_density(x; mu, v) = pdf((x-mu)/sqrt(v)) / sqrt(v)
  const double direct = std::exp(-0.5 * 4.0 / 3.0) / std::sqrt(2.0 * M_PI * 3.0);
  CHECK(gaussian_density(5.0, 3.0, 3.0) == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("parameter space volume, membership, and sampling") {
  const ParameterSpace space{{-1.0, 0.0}, {1.0, 4.0}};
  CHECK(space.dim() == 2);
  CHECK(space.volume() == doctest::Approx(8.0));
  CHECK(space.contains({0.0, 2.0}));
  CHECK(!space.contains({0.0, 5.0}));

  RandomStream rng(4);
  const auto draws = sample_uniform(space, 200, rng);
  CHECK(draws.size() == 200);
  for (const auto& theta : draws) CHECK(space.contains(theta));

  RandomStream again(4);
  const auto replay = sample_uniform(space, 200, again);
  CHECK(draws == replay);
}

TEST_CASE("posterior density is likelihood times box prior") {
  auto problem = testbed::make("sphere");
  const double prior = 1.0 / problem.space.volume();
  CHECK(problem.prior_density({0.0, 0.0}) == doctest::Approx(prior));
  CHECK(problem.prior_density({9.0, 0.0}) == 0.0);

  const double eta = problem.evaluate({1.0, 2.0});
  CHECK(eta == doctest::Approx(5.0));
  const double expect = gaussian_density(problem.y, eta, problem.noise_var) * prior;
  CHECK(problem.unnormalized_posterior({1.0, 2.0}, eta) == doctest::Approx(expect));
  CHECK(problem.unnormalized_posterior({9.0, 0.0}, 1.0) == 0.0);
}

TEST_CASE("simulator failure surfaces as EvaluationError") {
  CalibrationProblem bad;
  bad.space = ParameterSpace{{-1.0}, {1.0}};
  bad.simulator = [](const std::vector<double>&) { return std::nan(""); };
  CHECK_THROWS_AS(bad.evaluate({0.0}), EvaluationError);
}

TEST_CASE("testbed spot values") {
  auto himmelblau = testbed::make("himmelblau");
  CHECK(himmelblau.evaluate({3.0, 2.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(himmelblau.evaluate({0.0, 0.0}) == doctest::Approx(170.0));

  auto holder = testbed::make("holder");
  CHECK(holder.evaluate({8.05502, 9.66459}) == doctest::Approx(-19.2085).epsilon(1e-4));
  CHECK(holder.evaluate({0.0, 0.0}) == doctest::Approx(0.0));

  auto easom = testbed::make("easom");
  CHECK(easom.evaluate({M_PI, M_PI}) == doctest::Approx(-1.0));
  CHECK(std::fabs(easom.evaluate({0.0, 0.0})) < 1e-7);

  auto matyas = testbed::make("matyas");
  CHECK(matyas.evaluate({0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(matyas.evaluate({1.0, 1.0}) == doctest::Approx(0.04));

  auto ackley = testbed::make("ackley");
  CHECK(ackley.evaluate({0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ackley.evaluate({1.0, 1.0}) > 0.0);

  CHECK(testbed::names().size() == 6);
  CHECK_THROWS_AS(testbed::make("nope"), std::invalid_argument);

  const double post = testbed::true_unnormalized_posterior(himmelblau, {3.0, 2.0});
  const double expect = gaussian_density(1.0, 0.0, 1.0) / himmelblau.space.volume();
  CHECK(post == doctest::Approx(expect).epsilon(1e-12));
}
