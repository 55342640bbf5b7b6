#ifndef THERMOPROBE_RANDOM_HPP
#define THERMOPROBE_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace thermoprobe {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Small counter-based generator. Streams are keyed by a tuple of integers so
/// that (seed, generation, index) always yields the same draws no matter which
/// thread consumes them.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(std::uint64_t seed) noexcept : state_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}
  Stream(std::initializer_list<std::uint64_t> key) noexcept : state_(0x243f6a8885a308d3ULL) {
    for (std::uint64_t k : key) state_ = mix64(state_ ^ mix64(k + 0x9e3779b97f4a7c15ULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = (*this)();
    } while (r >= limit);
    return r % n;
  }

 private:
  std::uint64_t state_;
};

}  // namespace thermoprobe

#endif  // THERMOPROBE_RANDOM_HPP
