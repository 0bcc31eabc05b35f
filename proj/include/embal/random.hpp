#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace embal {

using Seed = std::uint64_t;
using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-class / per-run seeds.
inline Seed derive_seed(Seed base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Uniform draw in [0, 1). Clamps the rare 1.0 some generate_canonical versions return.
inline double uniform_unit(Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    const double r = dist(rng);
    return r < 1.0 ? r : std::nextafter(1.0, 0.0);
}

inline std::size_t uniform_index(Rng& rng, std::size_t size) {
    std::uniform_int_distribution<std::size_t> dist(0, size - 1);
    return dist(rng);
}

} // namespace embal
