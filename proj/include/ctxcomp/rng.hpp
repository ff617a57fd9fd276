#pragma once

#include <cstdint>
#include <random>

namespace ctxcomp {

/// Draw helpers over mt19937_64. The engine itself is fully specified by the
/// standard; the std distributions are not, so every range mapping here is
/// built from raw draws to keep output identical across platforms.

inline std::uint64_t next_u64(std::mt19937_64& rng) {
    return rng();
}

/// Uniform double in [0, 1): the top 53 bits of one draw.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

/// Uniform integer in [lo, hi], both inclusive. Modulo mapping: the tiny
/// bias is irrelevant for test-corpus generation and search sampling.
inline long long uniform_int(std::mt19937_64& rng, long long lo, long long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(rng() % span);
}

}  // namespace ctxcomp
