#pragma once

#include <cstdint>
#include <random>

namespace snrisk {

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Independent substream for (seed, stream). Each Monte Carlo block and each
// worker derives its own engine this way, so results never depend on which
// thread ran which block.
inline RngEngine make_substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s),
                      splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    return RngEngine(seq);
}

// Uniform on (0,1]: safe to feed into u^{-1/alpha} style inversions.
inline double uniform_open01(RngEngine& rng) {
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace snrisk
