#pragma once

#include <cmath>
#include <cstdint>

namespace sorteq {

// Counter-based pseudo-random stream: a splitmix64 walk whose initial state
// mixes (seed, stream_id). Streams are independent of the order in which they
// are created or consumed, which keeps parallel panel generation reproducible
// (one stream per firm, one per bootstrap replicate).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : state_(mix(mix(seed ^ 0x9e3779b97f4a7c15ull) ^
                   mix(stream_id * 0xbf58476d1ce4e5b9ull + 0x94d049bb133111ebull))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform on (0,1); never returns 0, safe under log().
  double next_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; draws come in cached pairs.
  double next_normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_open01();
    const double u2 = next_open01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Unbiased draw from {0, 1, ..., n-1} by rejection.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t bound = ~0ull - (~0ull % n);
    std::uint64_t v = next_u64();
    while (v >= bound) v = next_u64();
    return v % n;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

// Stable derivation of per-task seeds (bootstrap replicates, trials).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task_id) {
  RngStream s(seed, task_id);
  return s.next_u64();
}

}  // namespace sorteq
