#pragma once

#include <cstdint>
#include <random>

namespace dprl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to decorrelate (seed, stream) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent stream per (seed, stream) pair. Training and evaluation draw
// from different streams so evaluation never consumes training randomness.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(splitmix64(seed ^ splitmix64(stream)));
}

}  // namespace dprl
