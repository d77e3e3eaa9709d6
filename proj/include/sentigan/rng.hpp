#pragma once

#include <cmath>
#include <cstdint>

namespace sentigan {

// Counter-based generator: the draw sequence is a pure function of
// (seed, counter), so state can be serialized as two 64-bit integers
// and replayed bit-exactly on any platform.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    std::uint64_t next_u64() {
        std::uint64_t z = seed + (++counter) * 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    float next_uniform(float lo, float hi) {
        return lo + static_cast<float>(next_uniform()) * (hi - lo);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return n ? next_u64() % n : 0;
    }

    // Standard normal via Box-Muller; consumes exactly two draws.
    float next_normal() {
        double u1 = next_uniform();
        double u2 = next_uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) *
                                  std::cos(6.283185307179586 * u2));
    }

    // Independent child stream, e.g. one per corpus sample.
    RngState derive(std::uint64_t stream) const {
        RngState child;
        child.seed = seed ^ (stream * 0xD1342543DE82EF95ULL + 0x9E3779B97F4A7C15ULL);
        child.counter = 0;
        return child;
    }
};

}  // namespace sentigan
