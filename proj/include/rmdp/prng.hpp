#pragma once
// Deterministic random primitives. Streams are derived from (seed, labels)
// via splitmix64 and drawn through mt19937_64 with explicit bit-to-double
// mapping, so identical seeds give identical bytes on every platform.

#include <cstdint>
#include <random>

namespace rmdp::detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent substream for a labeled entity (e.g. one (state, action)).
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t label_a = 0,
                                     std::uint64_t label_b = 0) {
    std::uint64_t mixed = splitmix64(seed);
    mixed = splitmix64(mixed ^ splitmix64(label_a + 0x51ed270b7a639df5ULL));
    mixed = splitmix64(mixed ^ splitmix64(label_b + 0x2545f4914f6cdd1dULL));
    return std::mt19937_64(mixed);
}

/// Uniform double in [0, 1) from the engine's top 53 bits; unlike
/// uniform_real_distribution this is pinned down by the standard's mt19937_64
/// output and thus reproducible everywhere.
inline double canonical(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * canonical(rng);
}

/// Integer in [0, bound) by scaling; bias is irrelevant at test scale.
inline long uniform_index(std::mt19937_64& rng, long bound) {
    return static_cast<long>(canonical(rng) * static_cast<double>(bound)) % bound;
}

}  // namespace rmdp::detail
