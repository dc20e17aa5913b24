#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <initializer_list>
#include <random>

namespace gkdv {

/// splitmix64 finalizer; a bijective avalanche mix of one 64-bit word.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive hash of a key tuple. Used to derive independent,
/// scheduling-independent RNG streams from (seed, sample, index, ...).
inline std::uint64_t stream_key(std::initializer_list<std::int64_t> parts) noexcept {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) h = mix64(h ^ mix64(static_cast<std::uint64_t>(p)));
    return h;
}

using Engine = std::mt19937_64;

/// Uniform in (0, 1) from a key, via the top 53 bits (never 0 or 1).
constexpr double keyed_uniform(std::uint64_t key) noexcept {
    return (static_cast<double>(mix64(key) >> 11) + 0.5) * 0x1.0p-53;
}

/// Complex normal with independent N(0, 1/2) parts (E|z|^2 = 1), a
/// Box-Muller draw determined entirely by the key. Lets large coefficient
/// tables be filled in any order, or extended, without replaying a stream.
inline std::complex<double> keyed_complex_normal(std::uint64_t key) noexcept {
    const double u1 = keyed_uniform(key);
    const double u2 = keyed_uniform(key ^ 0xd1b54a32d192ed03ULL);
    return std::polar(std::sqrt(-std::log(u1)), 2.0 * std::numbers::pi * u2);
}

inline Engine make_engine(std::initializer_list<std::int64_t> parts) {
    return Engine(stream_key(parts));
}

}  // namespace gkdv
