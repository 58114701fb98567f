#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqcal/rng.hpp"

namespace seqcal {

class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

// Axis-aligned box of parameter values.
struct ParameterSpace {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }

  double volume() const;
  bool contains(const std::vector<double>& theta) const;
  std::vector<double> width() const;
};

// Simulation-based calibration target: a scalar observation y of the
// simulator output at the unknown true parameter, corrupted by Gaussian
// noise with known variance. The prior over the box is uniform.
struct CalibrationProblem {
  std::string name;
  ParameterSpace space;
  std::function<double(const std::vector<double>&)> simulator;
  double y = 0.0;
  double noise_var = 1.0;

  // Runs the simulator; throws EvaluationError on a non-finite output.
  double evaluate(const std::vector<double>& theta) const;

  // log p(theta): -log vol inside the box, -inf outside.
  double log_prior(const std::vector<double>& theta) const;
  double prior_density(const std::vector<double>& theta) const;

  // Unnormalized posterior density p~(theta | y) given the simulator output
  // eta at theta: the Gaussian likelihood of y around eta times the prior.
  double unnormalized_posterior(const std::vector<double>& theta, double eta) const;
};

struct Sample {
  std::vector<double> theta;
  double output = 0.0;
};

std::vector<double> sample_uniform(const ParameterSpace& space, RandomStream& rng);
std::vector<std::vector<double>> sample_uniform(const ParameterSpace& space, std::size_t count,
                                                RandomStream& rng);

}  // namespace seqcal
