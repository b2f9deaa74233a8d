#pragma once

#include "h2se/common.hpp"

#include <cstdint>

namespace h2se {

/// SplitMix64 (Steele, Lea, Flood 2014). Fully specified here so right-hand
/// sides can be regenerated bit for bit by any implementation:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() maps the top 53 bits to [0, 1); symmetric() to [-1, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * uniform() - 1.0; }

  Vector symmetric_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = symmetric();
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace h2se
