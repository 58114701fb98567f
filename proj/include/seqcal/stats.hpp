#pragma once

#include <cmath>

namespace seqcal {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
inline constexpr double kInvSqrt2 = 0.7071067811865475244;    // 1/sqrt(2)

// Standard normal density.
inline double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// Density of N(mean, var) at x.
inline double gaussian_density(double x, double mean, double var) {
  const double z = (x - mean) / std::sqrt(var);
  return kInvSqrt2Pi / std::sqrt(var) * std::exp(-0.5 * z * z);
}

}  // namespace seqcal
