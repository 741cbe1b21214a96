#pragma once

// Seeding: one master seed, independent substreams derived by hashing
// (seed, purpose, counter). Per-event decisions use the hash directly, so
// toggling one channel never shifts the random numbers seen by another.

#include <cstdint>
#include <random>

namespace spdclab {

enum class Purpose : std::uint64_t {
    cells = 1,
    idler_keep = 2,
    signal_keep = 3,
    route = 4,
    jitter_idler = 5,
    jitter_signal1 = 6,
    jitter_signal2 = 7,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t substream_key(std::uint64_t seed, Purpose purpose, std::uint64_t counter) {
    return splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(purpose)) ^ counter);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline constexpr double to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Counter-based uniform: the same (seed, purpose, counter) always yields the same value.
inline constexpr double counter_uniform(std::uint64_t seed, Purpose purpose, std::uint64_t counter) {
    return to_unit(substream_key(seed, purpose, counter));
}

/// Sequential engine for one substream.
class Substream {
public:
    Substream(std::uint64_t seed, Purpose purpose, std::uint64_t counter) : engine_(substream_key(seed, purpose, counter)) {}

    double uniform() { return to_unit(engine_()); }

    /// Uniform in (0, 1], safe for log().
    double uniform_open() { return 1.0 - uniform(); }

private:
    std::mt19937_64 engine_;
};

} // namespace spdclab
