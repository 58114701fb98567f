#include "seqcal/problem.hpp"

#include <cmath>

#include "seqcal/stats.hpp"

namespace seqcal {

double ParameterSpace::volume() const {
  double v = 1.0;
  for (std::size_t l = 0; l < lower.size(); ++l) v *= upper[l] - lower[l];
  return v;
}

bool ParameterSpace::contains(const std::vector<double>& theta) const {
  if (theta.size() != lower.size()) return false;
  for (std::size_t l = 0; l < lower.size(); ++l) {
    if (theta[l] < lower[l] || theta[l] > upper[l]) return false;
  }
  return true;
}

std::vector<double> ParameterSpace::width() const {
  std::vector<double> w(lower.size());
  for (std::size_t l = 0; l < lower.size(); ++l) w[l] = upper[l] - lower[l];
  return w;
}

double CalibrationProblem::evaluate(const std::vector<double>& theta) const {
  const double out = simulator(theta);
  if (!std::isfinite(out)) {
    throw EvaluationError("simulator returned a non-finite value for problem " + name);
  }
  return out;
}

double CalibrationProblem::log_prior(const std::vector<double>& theta) const {
  if (!space.contains(theta)) return -std::numeric_limits<double>::infinity();
  return -std::log(space.volume());
}

double CalibrationProblem::prior_density(const std::vector<double>& theta) const {
  return space.contains(theta) ? 1.0 / space.volume() : 0.0;
}

double CalibrationProblem::unnormalized_posterior(const std::vector<double>& theta,
                                                  double eta) const {
  return gaussian_density(y, eta, noise_var) * prior_density(theta);
}

std::vector<double> sample_uniform(const ParameterSpace& space, RandomStream& rng) {
  std::vector<double> theta(space.dim());
  for (std::size_t l = 0; l < space.dim(); ++l) {
    theta[l] = rng.uniform(space.lower[l], space.upper[l]);
  }
  return theta;
}

std::vector<std::vector<double>> sample_uniform(const ParameterSpace& space, std::size_t count,
                                                RandomStream& rng) {
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_uniform(space, rng));
  return out;
}

}  // namespace seqcal
