#include "vecgee/random.hpp"

#include <cmath>
#include <numbers>

namespace vecgee {

SplitMix64 SplitMix64::substream(std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t key = splitmix64_mix(seed ^ 0x6a09e667f3bcc909ULL);
  return SplitMix64(splitmix64_mix(key + splitmix64_mix(index + 0x3c6ef372fe94f82bULL)));
}

double SplitMix64::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double SplitMix64::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int SplitMix64::binomial(int trials, double p) noexcept {
  int count = 0;
  for (int t = 0; t < trials; ++t) count += bernoulli(p) ? 1 : 0;
  return count;
}

std::uint64_t SplitMix64::index(std::uint64_t bound) noexcept {
  if (bound <= 1) return 0;
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t draw = (*this)();
  while (draw >= limit) draw = (*this)();
  return draw % bound;
}

}  // namespace vecgee
