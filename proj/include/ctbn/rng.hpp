#ifndef CTBN_RNG_HPP_
#define CTBN_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace ctbn {

// Seedable random source used by the sampler.  The core generator is
// splitmix64 (Vigna's public-domain mixer): a 64-bit counter advanced by the
// golden-gamma constant and scrambled by two xor-multiply rounds.  The
// algorithm is a handful of integer operations with no platform-dependent
// behavior, and all floating-point draws below are derived from the raw bits
// by fixed arithmetic, so a seed reproduces the same stream everywhere --
// unlike the standard-library distributions, whose output is
// implementation-defined.
class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // A generator statistically independent of this one; advancing either does
  // not disturb the other.  Handy for fanning out parallel streams.
  SampleRng split() { return SampleRng(next_u64()); }

  // Uniform on the open interval (0,1): the top 53 bits plus a half-ulp
  // offset, so 0 and 1 are unreachable and log(u) is always finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Exponential holding time with the given rate (mean 1/rate).
  double exponential(double rate) {
    if (!(rate > 0.0)) {
      throw std::invalid_argument("SampleRng::exponential: rate must be positive");
    }
    return -std::log(uniform01()) / rate;
  }

  // Index drawn proportionally to the (nonnegative) weights, by a single
  // uniform draw and a cumulative scan.  `total` must equal the sum of the
  // weights; passing it in avoids a second pass and keeps callers honest
  // about what they normalized.
  int categorical(std::span<const double> weights, double total) {
    if (!(total > 0.0)) {
      throw std::invalid_argument("SampleRng::categorical: total weight must be positive");
    }
    const double u = uniform01() * total;
    double cum = 0.0;
    for (size_t i = 0; i < weights.size(); ++i) {
      cum += weights[i];
      if (u < cum) return static_cast<int>(i);
    }
    // Roundoff can leave u just past the final cumulative sum; return the
    // last index with positive weight.
    for (size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return static_cast<int>(i);
    }
    throw std::invalid_argument("SampleRng::categorical: all weights are zero");
  }

 private:
  std::uint64_t state_;
};

}  // namespace ctbn

#endif  // CTBN_RNG_HPP_
