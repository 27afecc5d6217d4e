#pragma once

#include <cstdint>

namespace rmf {

// splitmix64 finalizer: full-avalanche 64-bit mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based generator: the value at (seed, stream, counter) is a pure
// function of its three arguments, so draws can be made in any order, from
// any thread, and always reproduce bit-identically.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = splitmix64(seed ^ 0x6A09E667F3BCC909ULL);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ counter);
    return h;
}

// Uniform double in [0, 1) from the top 53 bits.
inline double to_unit_double(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace rmf
