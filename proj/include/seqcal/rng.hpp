#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace seqcal {

// SplitMix64 finalizer. Used to fold seeds and counters into statistically
// independent 64-bit states, so every random stream in the library is a pure
// function of (seed, counters...) and independent of evaluation order.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t next, Rest... rest) {
  return derive_seed(mix64(seed ^ mix64(next)), rest...);
}

// [0, 1) with 53 random bits.
inline double unit_from_bits(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// (0, 1]; safe as a log() argument.
inline double positive_unit_from_bits(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

// Counter-based uniform/normal draws: the value is fully determined by the key,
// never by call order. Normal uses Box-Muller on two counter-derived uniforms.
template <typename... Parts>
double counter_uniform(std::uint64_t seed, Parts... parts) {
  return unit_from_bits(derive_seed(seed, static_cast<std::uint64_t>(parts)...));
}

template <typename... Parts>
double counter_normal(std::uint64_t seed, Parts... parts) {
  const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(parts)...);
  const double u1 = positive_unit_from_bits(mix64(base ^ 0x1ull));
  const double u2 = unit_from_bits(mix64(base ^ 0x2ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Sequential stream for bulk sampling. mt19937_64 is fully specified by the
// standard, and the uniform mapping below avoids the implementation-defined
// std::uniform_real_distribution, so streams replay identically everywhere.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return unit_from_bits(gen_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  double normal() {
    const double u1 = positive_unit_from_bits(gen_());
    const double u2 = unit_from_bits(gen_());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace seqcal
