// Copyright 2026 The wignerlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/**
 * @file
 * SplitMix64 and the per-repetition stream derivation used by sample().
 *
 * Repetition r of a run with master seed s uses a fresh SplitMix64 whose
 * state is mix64(s + (r + 1) * 0x9E3779B97F4A7C15), mix64 being the
 * SplitMix64 output function. Every branch decision consumes one output u
 * and turns it into the uniform (u >> 11) * 2^-53 in [0, 1).
 */

#pragma once

#include <cstdint>

namespace wignerlab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

/// Independent stream for one repetition; depends only on (seed, repetition).
inline constexpr SplitMix64 repetition_stream(std::uint64_t seed, std::uint64_t repetition) noexcept {
  return SplitMix64(mix64(seed + (repetition + 1) * kGoldenGamma));
}

}  // namespace wignerlab
