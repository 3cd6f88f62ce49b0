#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace phidbn {

/// The one random engine used everywhere. Distributions below are written
/// out by hand so that streams are identical across standard libraries.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

/// Uniform integer in [0, n). Rejection sampling; n must be > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t range = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return static_cast<std::size_t>(v % range);
}

}  // namespace phidbn
