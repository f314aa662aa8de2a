#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gareg {

// Deterministic random stream. std::mt19937_64 produces a portable bit
// stream, but the standard <random> distributions are implementation
// defined, so all value mapping is done here. Every consumer draws from
// one logical stream in a fixed, documented order; results are therefore
// bit-reproducible across runs and thread counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1), 53 bits of randomness.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // Uniform integer in [0, n). Rejection sampling keeps the mapping exact.
    std::uint64_t uniform_index(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    bool coin_flip() { return (next_u64() & 1u) != 0; }

    // Standard normal via Box-Muller, one deviate per call (two uniform
    // draws consumed, no cached state).
    double gaussian() {
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive independent sub-stream seeds from
// one user seed (downsampling, GA stages, per-trial streams).
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream_id) {
    return mix_seed(base ^ mix_seed(stream_id + 1));
}

}  // namespace gareg
