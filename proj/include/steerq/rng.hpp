// Copyright 2026 The steerq Authors.
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

/**
 * @file rng.hpp
 * Counter-based random streams with labeled substreams.
 *
 * A stream is identified by a 64-bit key; the k-th draw is a pure function
 * of (key, k). Keys are derived from a master seed, a text label such as
 * "gates" or "outcomes/run_17", and an optional integer index, so any unit
 * of work can reconstruct its own randomness without reference to the order
 * in which other units ran.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace steerq {

namespace rng_detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
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

} // namespace rng_detail

/// Derive a substream key from a parent seed, a label and an index.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::string_view label,
                                   std::uint64_t index = 0) noexcept {
    using namespace rng_detail;
    std::uint64_t k = mix64(seed + kGolden);
    k = mix64(k ^ fnv1a(label));
    k = mix64(k ^ (index * kGolden + 0x632be59bd9b4e019ULL));
    return k;
}

/**
 * Counter-based generator: draw k returns mix64(key + (k+1)*golden).
 * Satisfies UniformRandomBitGenerator so it plugs into <random>
 * distributions.
 */
class Stream {
  public:
    using result_type = std::uint64_t;

    constexpr Stream() noexcept = default;
    constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}
    constexpr Stream(std::uint64_t seed, std::string_view label,
                     std::uint64_t index = 0) noexcept
        : key_(derive_key(seed, label, index)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return rng_detail::mix64(key_ + counter_ * rng_detail::kGolden);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace steerq
