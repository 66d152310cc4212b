#pragma once

// Portable randomness. std::mt19937_64 is bit-specified by the standard, but the
// standard distributions are not, so bounded integers, uniforms, normals and
// shuffles are implemented here on top of the raw engine output.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace satthermo {

using Rng = std::mt19937_64;

/// One splitmix64 step; also used to mix seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for a named purpose and up to two indices, derived from a master seed.
/// Stable across platforms and releases:
///   h = fnv1a64(purpose); s = splitmix64(master ^ h); s = splitmix64(s ^ a); s = splitmix64(s ^ b)
std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Uniform integer in [0, bound) by rejection sampling; bound must be > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// Uniform double in [0, 1) from the top 53 bits.
double uniform01(Rng& rng) noexcept;

/// Standard normal via the Box-Muller transform (one draw per call).
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle, swapping from the back: for i = n-1..1, j = uniform_below(i+1).
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace satthermo
