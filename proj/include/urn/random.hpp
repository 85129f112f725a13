#pragma once

// Seeded random streams. Everything here is bit-reproducible across
// platforms: the engine is std::mt19937_64 (fully specified by the standard)
// and the variates are derived from raw bits without the
// implementation-defined std:: distributions.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "urn/model.hpp"

namespace urn {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of the independent stream number `index` under `master_seed`:
/// splitmix64(splitmix64(master_seed) ^ index).
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ index);
}

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(stream_seed(master_seed, index));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Point of the product simplex with each colour block ~ Dirichlet(1, ..., 1).
inline SimplexPoint random_simplex_point(int d, int c, Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(d) * static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
        double sum = 0.0;
        for (int u = 0; u < d; ++u) {
            // Exp(1) variate; 1 - U lies in (0, 1].
            const double e = -std::log(1.0 - uniform01(rng));
            x[static_cast<std::size_t>(i) * d + u] = e;
            sum += e;
        }
        for (int u = 0; u < d; ++u) x[static_cast<std::size_t>(i) * d + u] /= sum;
    }
    return SimplexPoint(d, c, std::move(x));
}

}  // namespace urn
