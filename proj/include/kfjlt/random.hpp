#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace kfjlt {

// Counter-based generator built on the SplitMix64 finalizer. The n-th output of
// a stream is mix64(key + n * kGamma), so a stream is fully described by its
// 64-bit key and any sub-stream can be derived without touching the parent.
//
// Sub-stream convention used across the library:
//   Rng(seed).substream(0)  Rademacher sign factors, factor 1 first
//   Rng(seed).substream(1)  row samples
// Monte Carlo drivers derive one key per trial from (master seed, cell, trial).
//
// All distributions are implemented here rather than through <random> so that
// outputs do not depend on the standard library implementation.

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
  return mix64(parent ^ mix64(id * kGamma + 0x632BE59BD9B4E019ULL));
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t key) noexcept : key_(key) {}

  constexpr std::uint64_t key() const noexcept { return key_; }

  constexpr Rng substream(std::uint64_t id) const noexcept { return Rng(derive_key(key_, id)); }

  constexpr std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Unbiased (rejection on the low tail).
  std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  int sign() noexcept { return (next_u64() >> 63) != 0 ? -1 : 1; }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept {
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

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace kfjlt
