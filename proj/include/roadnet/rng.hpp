#pragma once
// Random primitives. Every sampler takes an explicit engine reference so the
// caller owns the stream; nothing here keeps hidden state. The inverse-CDF and
// rejection constructions below are spelled out (rather than std::
// distributions) because experiment reruns must be byte-identical and the
// standard leaves distribution algorithms implementation-defined.

#include <cmath>
#include <cstdint>

#include "roadnet/vec.hpp"

namespace roadnet {

// splitmix64 finalizer; bijective on 64-bit words
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman and Vigna). Defined here rather than taken from
// <random> so the byte stream is pinned by this header alone, and because the
// std engines cost several times more per draw on the machines we run on.
struct Xoshiro256 {
    using result_type = std::uint64_t;

    std::uint64_t s[4];

    // state from four successive splitmix64 outputs, the reference seeding;
    // mix64 is a bijection, so at most one word can be zero and the all-zero
    // fixed point is unreachable
    explicit Xoshiro256(std::uint64_t seed) {
        for (int i = 0; i < 4; ++i)
            s[i] = mix64(seed + static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ULL);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~static_cast<std::uint64_t>(0); }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t operator()() {
        const std::uint64_t out = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return out;
    }
};

using RandomStream = Xoshiro256;

// uniform on [0,1), 53-bit resolution
inline double uniform01(RandomStream& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// uniform on (0,1]; never 0, so log() and negative powers stay finite
inline double uniform_open0(RandomStream& g) {
    return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

inline double uniform(RandomStream& g, double a, double b) {
    return a + (b - a) * uniform01(g);
}

// fills out[0..n) with standard normals, Box-Muller pairs
inline void gaussian_fill(RandomStream& g, double* out, int n) {
    for (int i = 0; i < n; i += 2) {
        const double u = uniform_open0(g);
        const double v = uniform01(g);
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * M_PI * v;
        out[i] = r * std::cos(a);
        if (i + 1 < n) out[i + 1] = r * std::sin(a);
    }
}

inline double gaussian(RandomStream& g) {
    double z;
    gaussian_fill(g, &z, 1);
    return z;
}

// uniform direction on the unit sphere in dimension dim
inline Vector sample_direction(RandomStream& g, int dim) {
    Vector v(dim);
    for (;;) {
        gaussian_fill(g, v.c.data(), dim);
        const double n = norm(v);
        if (n > 1e-8) return v * (1.0 / n);
    }
}

namespace detail {

// Hormann's PTRS transformed-rejection sampler, exact for mean >= 10 or so
inline std::int64_t poisson_ptrs(RandomStream& g, double mean) {
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        double u = uniform01(g) - 0.5;
        double v = uniform_open0(g);
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(kf);
    }
}

}  // namespace detail

inline std::int64_t poisson_count(RandomStream& g, double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 64.0) {
        // race of exponential arrivals against the budget
        std::int64_t k = 0;
        double acc = -std::log(uniform_open0(g));
        while (acc <= mean) {
            ++k;
            acc += -std::log(uniform_open0(g));
        }
        return k;
    }
    return detail::poisson_ptrs(g, mean);
}

// Pareto tail P(v >= u) = (u / v0)^-(gamma-1) for u >= v0, by inverse CDF;
// the square-law tail gets the sqrt form since gamma = 3 is the workhorse
inline double pareto_speed(RandomStream& g, double v0, double gamma) {
    const double u = uniform_open0(g);
    if (gamma == 3.0) return v0 / std::sqrt(u);
    return v0 * std::pow(u, -1.0 / (gamma - 1.0));
}

}  // namespace roadnet
