#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace estimand_lab {

// SplitMix64 finalizer; used to spread user seeds and to derive independent
// per-repetition / per-trial streams from (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// Thin deterministic wrapper over std::mt19937_64. The standard engine is
// fully specified but the standard *distributions* are not; the transforms
// below are hand-rolled so identical seeds give identical bytes everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; one value per call, the partner draw is discarded to keep the
  // stream position a simple function of the call count.
  double normal(double mean, double sd) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Index draw from unnormalized nonnegative weights via cumulative scan.
  std::size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform01() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  // Uniform Dirichlet via normalized Exp(1) draws.
  std::vector<double> dirichlet_uniform(std::size_t n) {
    std::vector<double> g(n);
    double total = 0.0;
    for (auto& v : g) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      v = -std::log(u);
      total += v;
    }
    for (auto& v : g) v /= total;
    return g;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace estimand_lab
