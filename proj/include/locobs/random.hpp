#pragma once

#include <cstdint>
#include <random>

namespace locobs {

/// Seed for every random stream in the library. Equal seeds give
/// bit-identical streams on the same build.
struct RngSeed {
    std::uint64_t value = 0;

    friend bool operator==(RngSeed, RngSeed) = default;
};

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for the `index`-th independent sub-stream of `parent`.
/// Used for restarts and trials so results do not depend on scheduling.
inline RngSeed derive_seed(RngSeed parent, std::uint64_t index) {
    return RngSeed{splitmix64(splitmix64(parent.value) ^ splitmix64(index + 0x632be59bd9b4e019ULL))};
}

inline Engine make_engine(RngSeed seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32)};
    return Engine(seq);
}

} // namespace locobs
