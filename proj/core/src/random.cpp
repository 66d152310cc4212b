#include "satthermo/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace satthermo {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose, std::uint64_t a,
                          std::uint64_t b) noexcept {
    std::uint64_t s = splitmix64(master ^ fnv1a64(purpose));
    s = splitmix64(s ^ a);
    return splitmix64(s ^ b);
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("uniform_below: bound must be positive");
    // Reject the top partial bucket so every residue is equally likely.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

double uniform01(Rng& rng) noexcept {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
    double u1;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace satthermo
