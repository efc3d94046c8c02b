#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <string_view>

namespace burstnet {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed for a named sub-stream. Every random consumer draws from its own stream so that
/// adding draws in one stage never perturbs another.
inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(name)) + index);
}

inline Rng make_rng(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Rng(substream_seed(seed, name, index));
}

/// Uniform double in [0, 1) built from the top 53 bits; identical across standard libraries.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; identical across standard libraries.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

/// Fisher-Yates with uniform_below; reproducible across platforms unlike std::shuffle.
template <typename It>
void shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = uniform_below(rng, i);
        std::swap(first[i - 1], first[j]);
    }
}

inline double exponential(Rng& rng, double mean) {
    return -mean * std::log1p(-uniform01(rng));
}

/// Standard normal via Box-Muller (one value per call, the pair's sine half is discarded).
inline double standard_normal(Rng& rng) {
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    double u1 = uniform01(rng);
    while (u1 <= 0.0) {
        u1 = uniform01(rng);
    }
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

/// Poisson draw: inversion for small means, rounded normal approximation above 500.
inline std::int64_t poisson(Rng& rng, double mean) {
    if (mean <= 0.0) {
        return 0;
    }
    if (mean > 500.0) {
        const double x = std::round(mean + std::sqrt(mean) * standard_normal(rng));
        return x < 0.0 ? 0 : static_cast<std::int64_t>(x);
    }
    // split large means so exp(-mean) stays representable
    std::int64_t total = 0;
    while (mean > 30.0) {
        total += poisson(rng, 30.0);
        mean -= 30.0;
    }
    const double limit = std::exp(-mean);
    double prod = uniform01(rng);
    std::int64_t k = 0;
    while (prod > limit) {
        prod *= uniform01(rng);
        ++k;
    }
    return total + k;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

}  // namespace burstnet
