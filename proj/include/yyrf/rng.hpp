// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace yyrf {

/// SplitMix64 stream. Used instead of <random> distributions, whose outputs
/// are implementation-defined, so that seeded runs match bit-for-bit across
/// standard libraries.
class Rng
{
public:
    explicit Rng(uint64_t seed = 0) : mState(seed) {}

    /// Independent stream for (seed, a, b), e.g. (seed, step, ray index).
    static Rng stream(uint64_t seed, uint64_t a, uint64_t b = 0)
    {
        uint64_t s = mix(seed ^ 0x243f6a8885a308d3ULL);
        s = mix(s ^ (a + 0x13198a2e03707344ULL));
        s = mix(s ^ (b + 0xa4093822299f31d0ULL));
        return Rng(s);
    }

    uint64_t next()
    {
        mState += 0x9e3779b97f4a7c15ULL;
        return mix(mState);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n)
    {
        // Lemire's multiply-shift with rejection.
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        auto lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t t = (0 - n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next()) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one value per call).
    double normal()
    {
        double u1 = 1.0 - uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static uint64_t mix(uint64_t z)
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t mState;
};

} // namespace yyrf
