#pragma once

#include <cstdint>
#include <limits>

namespace fraclab {

/// SplitMix64 output function (the finalizer applied to an advanced state).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Folds indices into a seed one at a time: h <- mix64(h ^ mix64(c + k*gamma))
/// for the k-th component c (k starting at 1). Order matters.
template <typename... Ints>
constexpr std::uint64_t derive_seed(std::uint64_t master, Ints... components) {
  std::uint64_t h = master;
  std::uint64_t k = 0;
  ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(components) +
                        (++k) * kGoldenGamma))),
   ...);
  return h;
}

/// 64-bit state advanced by the golden gamma, output through mix64.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform on [0, 1) from the top 53 bits.
  constexpr double uniform() {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [0, n) by rejection; n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (true) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform on [lo, hi] inclusive.
  constexpr long long between(long long lo, long long hi) {
    return lo + static_cast<long long>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  constexpr std::uint64_t state() const { return state_; }
  constexpr void set_state(std::uint64_t s) { state_ = s; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates with SplitMix64::below.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, SplitMix64& rng) {
  const auto n = last - first;
  for (auto i = n - 1; i > 0; --i) {
    const auto j = static_cast<decltype(i)>(
        rng.below(static_cast<std::uint64_t>(i) + 1));
    using std::swap;
    swap(first[i], first[j]);
  }
}

}  // namespace fraclab
