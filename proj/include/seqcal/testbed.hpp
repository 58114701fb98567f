#pragma once

#include <string>
#include <vector>

#include "seqcal/problem.hpp"

namespace seqcal {

// Two-dimensional benchmark calibration problems. Each pairs a classic test
// function with a fixed observation and noise variance; the observation sits
// at (or near) the function's optimum so the posterior concentrates there.
namespace testbed {

std::vector<std::string> names();

// Throws std::invalid_argument for an unknown name.
CalibrationProblem make(const std::string& name);

// p~(theta | y) through the real simulator; reference for emulated estimates.
double true_unnormalized_posterior(const CalibrationProblem& problem,
                                   const std::vector<double>& theta);

}  // namespace testbed

}  // namespace seqcal
