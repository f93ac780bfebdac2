#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace latmove {

/// 64-bit seed for every stochastic routine. Identical seeds reproduce
/// identical results bit-for-bit.
struct RngSeed {
  std::uint64_t value = 0;

  constexpr bool operator==(const RngSeed&) const = default;
};

namespace detail {

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives an independent stream seed from (master, tag, index).
/// Used so that realization i draws the same numbers regardless of how work
/// is split across threads.
constexpr RngSeed derive_seed(RngSeed master, std::string_view tag,
                              std::uint64_t index) noexcept {
  std::uint64_t h = detail::splitmix_finalize(master.value ^ 0x9e3779b97f4a7c15ULL);
  h = detail::splitmix_finalize(h ^ detail::fnv1a(tag));
  h = detail::splitmix_finalize(h + 0x9e3779b97f4a7c15ULL * (index + 1));
  return RngSeed{h};
}

/// SplitMix64 generator. Small state, cheap to construct per sample, and
/// satisfies std::uniform_random_bit_generator.
class SplitMix64 {
public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(RngSeed seed) noexcept : state_(seed.value) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return detail::splitmix_finalize(state_);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Exponential waiting time with the given rate; +inf for rate <= 0.
  double exponential(double rate) noexcept {
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return -std::log1p(-uniform()) / rate;
  }

private:
  std::uint64_t state_;
};

}  // namespace latmove
