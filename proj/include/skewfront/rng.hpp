#pragma once

// Counter-based splittable random streams (Philox4x32-10).
// Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC 2011.
//
// Streams are addressed by (seed, label, substream index). The label selects a
// module-level stream ("env.degrees", "mc.hit", ...), the index a trajectory or
// array slot within it. Values are pure functions of the address, so adding a
// consumer never perturbs another consumer's draws and array entries can be
// regenerated independently (prefix-stable environment extension relies on this).

#include <cmath>
#include <cstdint>
#include <string_view>

namespace skewfront {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += UINT64_C(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = UINT64_C(0xcbf29ce484222325);
    for (unsigned char c : s) {
        h ^= c;
        h *= UINT64_C(0x100000001b3);
    }
    return h;
}

inline void philox_round(std::uint32_t ctr[4], const std::uint32_t key[2]) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr[0] = hi1 ^ ctr[1] ^ key[0];
    ctr[1] = lo1;
    ctr[2] = hi0 ^ ctr[3] ^ key[1];
    ctr[3] = lo0;
}

} // namespace detail

/// One independent stream of a keyed Philox4x32-10 generator.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::string_view label, std::uint64_t substream = 0) {
        std::uint64_t state = seed ^ detail::fnv1a64(label);
        const std::uint64_t k = detail::splitmix64(state);
        key_[0] = static_cast<std::uint32_t>(k);
        key_[1] = static_cast<std::uint32_t>(k >> 32);
        sub_lo_ = static_cast<std::uint32_t>(substream);
        sub_hi_ = static_cast<std::uint32_t>(substream >> 32);
        block_ = 0;
        have_ = 0;
    }

    std::uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[--have_];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe to pass to log().
    double next_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_double() < p; }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double next_normal() {
        // Box-Muller; one value per call keeps the stream layout simple.
        const double u1 = next_open();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    void refill() {
        std::uint32_t ctr[4] = {static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32), sub_lo_, sub_hi_};
        std::uint32_t key[2] = {key_[0], key_[1]};
        for (int round = 0; round < 10; ++round) {
            detail::philox_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        for (int i = 0; i < 4; ++i) buf_[i] = ctr[i];
        have_ = 4;
        ++block_;
    }

    std::uint32_t key_[2];
    std::uint32_t sub_lo_, sub_hi_;
    std::uint64_t block_;
    std::uint32_t buf_[4];
    int have_;
};

/// Value of stream (seed, label) at array position `index`, as a double in [0,1).
/// Random access: independent of any other draw.
inline double stream_value(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    RngStream s(seed, label, index);
    return s.next_double();
}

} // namespace skewfront
