// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_RNG_HPP
#define LEAFLYAP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace leaflyap {

// SplitMix64 (Steele/Lea/Flood; Vigna's fixed-increment variant). One 64-bit
// state word, passes BigCrush, and mixes counter-derived seeds well, which is
// exactly what the per-path stream derivation needs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
        z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (UINT64_C(0x9E3779B97F4A7C15) * (b + 1)));
    g.next();
    return g.next();
}

// Per-path random stream. Streams are derived purely from
// (master seed, path index, substream), so an ensemble is reproducible
// regardless of how paths are distributed over workers.
class PathRng {
public:
    PathRng(std::uint64_t master, std::uint64_t path_index, std::uint64_t substream = 0)
        : gen_(mix_seed(mix_seed(master, path_index), substream)) {}

    // uniform in (0,1); strictly positive so log() is safe
    double uniform() {
        const std::uint64_t u = gen_.next() >> 11; // 53 bits
        return (static_cast<double>(u) + 0.5) * 0x1.0p-53;
    }

    // standard normal, Marsaglia polar method with one cached value
    double gaussian() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * m;
        has_cache_ = true;
        return u * m;
    }

    std::uint64_t next_u64() { return gen_.next(); }

private:
    SplitMix64 gen_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

} // namespace leaflyap

#endif
