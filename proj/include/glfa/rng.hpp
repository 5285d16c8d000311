#ifndef GLFA_RNG_HPP
#define GLFA_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace glfa {

// All randomness in the library flows through these helpers so that a run is
// reproducible byte-for-byte from a single master seed. Independent components
// (split, init, shuffle, selection) draw from named sub-streams derived here.

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the stream name
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(master ^ h);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::string_view stream) {
    return std::mt19937_64(derive_seed(master, stream));
}

// Strictly inside (0,1); 53-bit resolution.
inline double uniform_open01(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased draw from [0, n). Distribution-free so results do not depend on
// the standard library implementation.
inline std::uint64_t uniform_below(std::mt19937_64& eng, std::uint64_t n) {
    const std::uint64_t reject_below = (0 - n) % n;  // 2^64 mod n
    std::uint64_t r;
    do {
        r = eng();
    } while (r < reject_below);
    return r % n;
}

template <typename T>
void fisher_yates(std::vector<T>& v, std::mt19937_64& eng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_below(eng, i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace glfa

#endif
