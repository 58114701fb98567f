#include "seqcal/testbed.hpp"

#include <cmath>
#include <stdexcept>

namespace seqcal {
namespace testbed {

namespace {

double himmelblau(const std::vector<double>& t) {
  const double a = t[0] * t[0] + t[1] - 11.0;
  const double b = t[0] + t[1] * t[1] - 7.0;
  return a * a + b * b;
}

double holder(const std::vector<double>& t) {
  const double r = std::sqrt(t[0] * t[0] + t[1] * t[1]);
  return -std::fabs(std::sin(t[0]) * std::cos(t[1]) * std::exp(std::fabs(1.0 - r / M_PI)));
}

double easom(const std::vector<double>& t) {
  const double d1 = t[0] - M_PI;
  const double d2 = t[1] - M_PI;
  return -std::cos(t[0]) * std::cos(t[1]) * std::exp(-(d1 * d1 + d2 * d2));
}

double sphere(const std::vector<double>& t) { return t[0] * t[0] + t[1] * t[1]; }

double matyas(const std::vector<double>& t) {
  return 0.26 * (t[0] * t[0] + t[1] * t[1]) - 0.48 * t[0] * t[1];
}

double ackley(const std::vector<double>& t) {
  const double sq = 0.5 * (t[0] * t[0] + t[1] * t[1]);
  const double cs = 0.5 * (std::cos(2.0 * M_PI * t[0]) + std::cos(2.0 * M_PI * t[1]));
  return -20.0 * std::exp(-0.2 * std::sqrt(sq)) - std::exp(cs) + M_E + 20.0;
}

ParameterSpace box(double lo, double hi) { return ParameterSpace{{lo, lo}, {hi, hi}}; }

}  // namespace

std::vector<std::string> names() {
  return {"himmelblau", "holder", "easom", "sphere", "matyas", "ackley"};
}

CalibrationProblem make(const std::string& name) {
  if (name == "himmelblau") return {name, box(-5.0, 5.0), himmelblau, 1.0, 1.0};
  if (name == "holder") return {name, box(-10.0, 10.0), holder, -19.2085, 50.0};
  if (name == "easom") return {name, box(-10.0, 10.0), easom, -1.0, 10.0};
  if (name == "sphere") return {name, box(-5.0, 5.0), sphere, 0.0, 10.0};
  if (name == "matyas") return {name, box(-10.0, 10.0), matyas, 0.0, 10.0};
  if (name == "ackley") return {name, box(-5.0, 5.0), ackley, 0.0, 10.0};
  throw std::invalid_argument("unknown testbed problem: " + name);
}

double true_unnormalized_posterior(const CalibrationProblem& problem,
                                   const std::vector<double>& theta) {
  return problem.unnormalized_posterior(theta, problem.evaluate(theta));
}

}  // namespace testbed
}  // namespace seqcal
