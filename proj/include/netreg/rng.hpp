#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace netreg {

/// SplitMix64 (Steele, Lea, Flood 2014). Every random quantity in the
/// library is drawn from this engine through the helpers below, so sampled
/// graphs and Monte Carlo records are bit-identical across platforms that
/// share IEEE-754 doubles.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Standard normal by the Box-Muller transform (one draw per call).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }

private:
  std::uint64_t state_;
};

/// Derive a child seed from a parent seed and a stream label. Children of the
/// same parent with different labels are statistically independent streams.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) noexcept {
  SplitMix64 g(parent ^ (label * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  g();
  return g();
}

}  // namespace netreg
