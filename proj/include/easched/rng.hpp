#ifndef EASCHED_RNG_HPP
#define EASCHED_RNG_HPP

#include <cstdint>
#include <random>

namespace easched {

// Uniform draws built directly on the raw mt19937_64 stream. The standard
// distributions are implementation-defined, which would tie replay
// determinism to one standard library.

inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + uniform_unit(rng) * (hi - lo);
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform_unit(rng) * static_cast<double>(n));
    return i < n ? i : n - 1;
}

inline bool chance(std::mt19937_64& rng, double probability) {
    return uniform_unit(rng) < probability;
}

/// splitmix64 step; combines independent seed components (run seed, batch
/// index, ...) into uncorrelated streams.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace easched

#endif
