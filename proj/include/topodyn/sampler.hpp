#pragma once

#include <cmath>
#include <cstdint>

namespace topodyn {

namespace detail {

// SplitMix64 finalizer (Steele/Lea/Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

}  // namespace detail

// Counter-based generator: draw k of stream (seed, stream) is a pure
// function of (seed, stream, k). Parallel consumers seeded per work item
// therefore reproduce the exact stream regardless of thread schedule.
class SeededSampler {
 public:
  explicit SeededSampler(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(stream == 0 ? seed
                          : detail::mix64(seed ^ (detail::kGamma * stream))) {}

  std::uint64_t next_u64() {
    ++counter_;
    return detail::mix64(seed_ + detail::kGamma * counter_);
  }

  // Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

  // Standard normal via Box-Muller; two draws per call, no cached state,
  // so (seed, counter) fully determines what comes next.
  double next_gaussian() {
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

  // Independent child stream; deterministic in (seed, stream).
  SeededSampler split(std::uint64_t stream) const {
    return SeededSampler(seed_, stream + 1);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Base-2 radical inverse; the classic low-discrepancy sequence on [0,1).
inline double van_der_corput(std::uint64_t index) {
  double r = 0.0;
  double f = 0.5;
  while (index) {
    if (index & 1u) r += f;
    f *= 0.5;
    index >>= 1;
  }
  return r;
}

}  // namespace topodyn
