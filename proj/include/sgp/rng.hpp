#pragma once

#include <cmath>
#include <cstdint>

#include "sgp/common.hpp"

namespace sgp {

// Counter-based pseudo-random normals.
//
// Every draw is a pure function of (seed, stream, counter), so ensembles are
// reproducible bit-for-bit regardless of evaluation order or thread count.
// The generator is a splitmix64 finalizer applied to the mixed key; normals
// come from Box-Muller on two derived uniforms.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(a ^ 0x2545f4914f6cdd1dULL);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

// uniform in (0,1): top 53 bits, offset so 0 is excluded
inline double u64_to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal draw indexed by (seed, stream, counter).
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t counter) {
    const std::uint64_t h1 = mix3(seed, stream, 2 * counter);
    const std::uint64_t h2 = mix3(seed, stream, 2 * counter + 1);
    const double u1 = u64_to_unit(h1);
    const double u2 = u64_to_unit(h2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

} // namespace sgp
