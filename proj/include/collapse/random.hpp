// Copyright 2026 The collapse-sim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COLLAPSE_RANDOM_HPP_
#define COLLAPSE_RANDOM_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace collapse {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (key, counter), which makes trajectories reproducible
// under any parallel schedule.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Counter round(const Counter& c, const Key& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr Counter block(Counter c, Key k) {
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    c = round(c, k);
  }
  return c;
}

}  // namespace philox

/// Independent stream roles for one trajectory.
enum class StreamRole : std::uint32_t {
  jump_times = 0,
  wiener = 1,
  flash_noise = 2,
  flash_position = 3,
  auxiliary = 4,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Child seed for a named sub-experiment.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

/// Uniform in the open interval (0, 1). Uses 52 bits: with 53, the largest
/// value 1 - 2^-54 rounds to 1.
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Random stream keyed by (seed, stream index, role). Draw i of the stream is
/// block i of Philox with counter (i_lo, i_hi, index, role).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint32_t index, StreamRole role)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        index_(index),
        role_(static_cast<std::uint32_t>(role)) {}

  philox::Counter block_at(std::uint64_t i) const {
    return philox::block({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32),
                          index_, role_},
                         key_);
  }

  /// Pair of independent standard normals from block i (Box-Muller).
  std::array<double, 2> normal_pair_at(std::uint64_t i) const {
    const auto b = block_at(i);
    const double u1 = to_open_unit(b[0], b[1]);
    const double u2 = to_open_unit(b[2], b[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
  }

  /// Standard normal number i of the stream (random access).
  double normal_at(std::uint64_t i) const {
    const auto pair = normal_pair_at(i / 2);
    return pair[i % 2];
  }

  double uniform() {
    if (!have_uniform_) {
      const auto b = block_at(counter_++);
      buffered_uniform_ = to_open_unit(b[2], b[3]);
      have_uniform_ = true;
      return to_open_unit(b[0], b[1]);
    }
    have_uniform_ = false;
    return buffered_uniform_;
  }

  double normal() {
    if (!have_normal_) {
      const auto pair = normal_pair_at(counter_++);
      buffered_normal_ = pair[1];
      have_normal_ = true;
      return pair[0];
    }
    have_normal_ = false;
    return buffered_normal_;
  }

  /// Exp(1); strictly positive.
  double exponential() { return -std::log(uniform()); }

 private:
  philox::Key key_;
  std::uint32_t index_;
  std::uint32_t role_;
  std::uint64_t counter_ = 0;
  bool have_uniform_ = false;
  double buffered_uniform_ = 0.0;
  bool have_normal_ = false;
  double buffered_normal_ = 0.0;
};

}  // namespace collapse

#endif  // COLLAPSE_RANDOM_HPP_
