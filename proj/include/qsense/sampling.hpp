#pragma once

#include <cstdint>
#include <random>

namespace qsense {

struct OutcomeCounts {
  std::int64_t n_plus;
  std::int64_t n_minus;
};

/// Binomial draw of `repetitions` sigma_x outcomes with P(+1) = p_plus.
template <typename Engine>
OutcomeCounts sample_outcomes(double p_plus, std::int64_t repetitions, Engine& rng) {
  if (p_plus >= 1.0) return {repetitions, 0};
  if (p_plus <= 0.0) return {0, repetitions};
  std::binomial_distribution<std::int64_t> draw(repetitions, p_plus);
  const std::int64_t plus = draw(rng);
  return {plus, repetitions - plus};
}

/// SplitMix64 finaliser applied to (master, index): independent, reproducible
/// per-repetition seeds.
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace qsense
