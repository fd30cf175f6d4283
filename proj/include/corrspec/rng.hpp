#pragma once

// Counter-based splittable RNG. Every logical stream (asset row, factor
// mode, bootstrap iteration) derives its own generator from (seed, stream),
// so simulations are bit-identical at any parallelism degree.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace corrspec {

namespace detail {

// SplitMix64 finalizer (Steele/Lea/Flood). Full 64-bit avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

class StreamRng {
public:
    StreamRng(std::uint64_t seed, std::uint64_t stream)
        : state_(detail::mix64(detail::mix64(seed) ^ (0x5851f42d4c957f2dULL * (stream + 1)))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    // Uniform in (0,1); never returns 0 so log() below is safe.
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; caches the second deviate.
    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

// Derive a child seed for an independent substream family.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return detail::mix64(detail::mix64(seed ^ 0xd6e8feb86659fd93ULL) + salt);
}

} // namespace corrspec
