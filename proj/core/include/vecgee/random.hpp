#pragma once

// SplitMix64 streams. Each Monte Carlo replicate gets its own stream keyed by
// (seed, replicate).

#include <cstdint>

namespace vecgee {

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  /// Independent stream for one replicate of a seeded run.
  static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Standard normal by the Box-Muller transform (second variate cached).
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Sum of `trials` Bernoulli(p) draws.
  int binomial(int trials, double p) noexcept;
  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t index(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace vecgee
