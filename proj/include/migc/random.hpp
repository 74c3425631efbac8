#pragma once

// Seedable, platform-independent random streams. Every draw goes through
// std::mt19937_64 (whose output sequence is fixed by the standard) and the
// conversions below, never through std::*_distribution.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "migc/model.hpp"

namespace migc {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent stream `stream` of the experiment seeded with `seed`.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL)));
}

/// Uniform double in the open interval (0, 1).
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, bound), bound >= 1, without modulo bias.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

/// Flat Dirichlet(1,...,1) draw: n unit exponentials, normalized.
inline Distribution sample_simplex(std::size_t n, Rng& rng) {
  std::vector<double> weights(n);
  for (double& w : weights) w = -std::log(uniform_open01(rng));
  const double total = compensated_sum(weights);
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] /= total;
    labels.push_back(std::to_string(i + 1));
  }
  return Distribution::validate(std::move(labels), std::move(weights));
}

}  // namespace migc
