// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace platecav {

// Counter-based random stream built on SplitMix64. Every (seed, frequency
// index, sample index) triple owns an independent stream, so ensemble
// generation is order-independent and safe to parallelize. The generator is
// pure integer arithmetic and produces identical doubles on every platform.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static RandomStream for_sample(std::uint64_t seed, std::uint64_t freq_index,
                                 std::uint64_t sample_index) {
    std::uint64_t s = mix(seed ^ 0x9e3779b97f4a7c15ull);
    s = mix(s ^ (freq_index * 0xbf58476d1ce4e5b9ull));
    s = mix(s ^ (sample_index * 0x94d049bb133111ebull));
    return RandomStream(s);
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform on [0, 1), 53-bit mantissa.
  double next_uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace platecav
