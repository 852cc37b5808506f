#pragma once

#include <cstdint>
#include <random>

namespace stosew {

// splitmix64 finalizer, used to decorrelate (seed, path, tag) triples.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// One RNG stream per (seed, path, tag). The stream depends only on these
/// three values, so results are identical no matter how paths are scheduled
/// across workers.
inline std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path, std::uint64_t tag = 0) {
    return std::mt19937_64(mix64(seed ^ mix64(path ^ mix64(tag))));
}

} // namespace stosew
