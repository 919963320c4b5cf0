#pragma once

// Counter-based random streams (Philox4x32-10) and the variate generators
// used by the simulation module. Every draw is a pure function of
// (key, counter), so results do not depend on evaluation order or threading.

#include <array>
#include <cmath>
#include <cstdint>

#include "tlaw/numerics.hpp"

namespace tlaw {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

inline PhiloxKey split_key(std::uint64_t key) {
    return {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
}

// Sequence of uniforms for one logical stream, identified by a 64-bit key and
// three 32-bit stream words. The fourth counter word (word 0) walks the
// sequence, so distinct stream words never share a counter value.
class UniformStream {
public:
    UniformStream(std::uint64_t key, std::uint32_t s1, std::uint32_t s2, std::uint32_t s3)
        : key_(split_key(key)), s1_(s1), s2_(s2), s3_(s3) {}

    std::uint64_t next_u64() {
        if (pos_ == 2) refill();
        return buf_[pos_++];
    }

    // Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        const PhiloxCounter out = philox4x32_10({block_++, s1_, s2_, s3_}, key_);
        buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        pos_ = 0;
    }

    PhiloxKey key_;
    std::uint32_t s1_, s2_, s3_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

// Child seed for (index_a, index_b) under a parent seed. Used to give each
// replicate of each grid cell its own key.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint32_t index_a,
                                 std::uint32_t index_b) {
    const PhiloxCounter out =
        philox4x32_10({index_a, index_b, 0x5EEDu, 0xD1CE5EEDu}, split_key(parent));
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

// ---------------------------------------------------------------------------
// Variates
// ---------------------------------------------------------------------------

// Standard normal by inversion of the CDF.
inline double draw_normal(UniformStream& s) { return normal_quantile(s.uniform()); }

inline bool draw_bernoulli(UniformStream& s, double p) { return s.uniform() < p; }

// Poisson(rate). Sequential inversion below rate 10; above, the PTRS
// transformed-rejection sampler (Hormann 1993), which is exact.
inline std::int64_t draw_poisson(UniformStream& s, double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw Error(ErrorCode::domain, "draw_poisson: rate must be finite and nonnegative");
    if (rate == 0.0) return 0;

    if (rate < 10.0) {
        const double u = s.uniform();
        double p = std::exp(-rate);
        double cdf = p;
        std::int64_t k = 0;
        // the cap only matters when u falls in the rounding gap near 1
        while (u > cdf && k < 1000) {
            ++k;
            p *= rate / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

    const double slam = std::sqrt(rate);
    const double loglam = std::log(rate);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = s.uniform() - 0.5;
        const double v = s.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + rate + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -rate + k * loglam - std::lgamma(k + 1.0))
            return static_cast<std::int64_t>(k);
    }
}

} // namespace tlaw
