// Seeding helpers. Every stochastic step in the library derives its own
// generator from a master seed plus a stream index, so results do not depend
// on evaluation order or worker count.
#pragma once

#include <cstdint>
#include <random>

namespace ftn {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic per-stream seed: hash of (master, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(master ^ mix64(index + 0x51ed270b4d2853c7ULL));
}

inline std::mt19937_64 make_rng(std::uint64_t seed)
{
    return std::mt19937_64(seed);
}

// Fisher-Yates permutation of 0..n-1. Hand-rolled (index draw via modulo) so
// the permutation is identical on every platform for a given seed.
inline std::vector<std::size_t> random_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i)
        p[i] = i;
    std::mt19937_64 gen(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(gen() % i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

} // namespace ftn
