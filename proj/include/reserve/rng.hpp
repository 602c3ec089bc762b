#pragma once

#include <cstdint>
#include <random>

namespace reserve {

using Rng = std::mt19937_64;

// splitmix64 step, used to mix seed material into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t a,
                              std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

// Stream for (scenario, method, salt). Results must not depend on worker
// count, so every unit of work derives its own engine from the master seed.
inline Rng make_stream(std::uint64_t master, std::uint64_t scenario,
                       std::uint64_t method, std::uint64_t salt = 0) {
    return Rng(mix_seed(master, scenario, method, salt));
}

} // namespace reserve
