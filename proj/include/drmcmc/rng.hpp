#ifndef DRMCMC_RNG_HPP
#define DRMCMC_RNG_HPP

#include <cstdint>
#include <random>

namespace drmcmc {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate derived seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4a4a4d049bbcaULL;
    return z ^ (z >> 31);
}

// Seed for worker `index` derived from a master seed. Independent streams for
// parallel chains / grid cells come from here, never from sequential draws.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index));
}

}  // namespace drmcmc

#endif
