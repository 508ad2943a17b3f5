#pragma once

#include <cstdint>
#include <limits>

namespace wcrisk {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// Counter-based 64-bit generator: the i-th output of stream `key` is
/// splitmix64_mix(key + (i + 1)·γ), γ the golden-ratio constant. Any output
/// can be computed without generating the preceding ones, and streams with
/// distinct keys do not share state.
///
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
      : key_(key), counter_(counter) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGoldenGamma);
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t counter() const noexcept { return counter_; }

  /// Key of sub-stream `index` of a base seed; run i of an ensemble draws
  /// from stream_key(seed, i).
  static constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t index) noexcept {
    return splitmix64_mix(seed ^ splitmix64_mix(index + kGoldenGamma));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace wcrisk
