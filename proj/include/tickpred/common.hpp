#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tickpred {

inline constexpr int kFeatureDim = 13;
inline constexpr int kWindowLen = 60;
inline constexpr int kNumClasses = 3;
inline constexpr int kDefaultHorizon = 59;
inline constexpr std::int64_t kGridStepMs = 500;

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Pipeline errors carry a human-readable message and map to nonzero CLI exit.
class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from (seed, stream tag, epoch/index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t n = 0) {
  return mix64(mix64(seed ^ (tag * 0x9e3779b97f4a7c15ULL)) + n);
}

/// Deterministic RNG. Distribution transforms are hand-rolled so output does
/// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x1234567890abcdefULL) {
    // warm up splitmix into xoshiro-style usage of mt-free generator
    for (int i = 0; i < 4; ++i) next();
  }

  std::uint64_t next() {
    state_ = mix64(state_ + 0x9e3779b97f4a7c15ULL);
    return state_;
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Lemire-style rejection-free enough for our n << 2^64; use modulo of a
    // 128-bit multiply to avoid bias.
    __uint128_t m = static_cast<__uint128_t>(next()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal via Box-Muller (two draws per call, no cached spare).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// True with probability p.
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace tickpred
