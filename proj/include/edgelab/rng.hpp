#pragma once

#include <cstdint>

namespace edgelab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based disorder field: v_n = uniform[-1,1) keyed by (seed, site),
// independent of iteration order and of geometry padding. Translating the
// sample shifts the lookup, which is how the covariance tests move omega.
struct DisorderSample {
    std::uint64_t seed = 0;
    long shift1 = 0;
    long shift2 = 0;

    double value(long n1, long n2) const {
        const std::uint64_t key =
            (static_cast<std::uint64_t>(static_cast<std::uint32_t>(n1 + shift1)) << 32) |
            static_cast<std::uint32_t>(n2 + shift2);
        const std::uint64_t h = splitmix64(seed ^ splitmix64(key));
        return static_cast<double>(h >> 11) * (2.0 / 9007199254740992.0) - 1.0; // 2^53
    }

    DisorderSample translated(long k1, long k2) const {
        return DisorderSample{seed, shift1 + k1, shift2 + k2};
    }
};

// Stated per-sample seed derivation: adding samples never reshuffles existing ones.
inline std::uint64_t derive_sample_seed(std::uint64_t master, std::uint64_t sample_index) {
    return splitmix64(master ^ splitmix64(sample_index + 0x51a7b0d5e3f1c201ULL));
}

} // namespace edgelab
