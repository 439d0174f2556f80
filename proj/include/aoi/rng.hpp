// Deterministic split-stream random numbers for the simulator.
//
// Replication r of a run draws from engines seeded as pure functions of
// (base_seed, r, substream), so results are reproducible bit-for-bit and
// replications can execute in any order or in parallel. Arrival times
// and decode outcomes use separate substreams: changing how one scheme
// consumes decode draws never perturbs the arrival sequence.
//
// Transforms are hand-rolled on top of mt19937_64 (whose output sequence
// the standard pins down); std::exponential_distribution and friends are
// implementation-defined and would break cross-platform determinism.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoi {

/// splitmix64 step; good avalanche, the usual choice for seed expansion.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t replication, std::uint64_t substream) {
    std::uint64_t x = splitmix64(base);
    x = splitmix64(x ^ (0x9e3779b97f4a7c15ull * (replication + 1)));
    x = splitmix64(x ^ (0xc2b2ae3d27d4eb4full * (substream + 1)));
    return x;
}

/// Uniform draw in (0,1], 53-bit resolution. The open-at-zero side keeps
/// log() finite in the exponential transform.
inline double uniform_pos(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Uniform draw in [0,1).
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double draw_exponential(std::mt19937_64& eng, double rate) {
    return -std::log(uniform_pos(eng)) / rate;
}

inline bool draw_bernoulli(std::mt19937_64& eng, double p) {
    return uniform01(eng) < p;
}

/// The two independent substreams one replication owns.
struct RandomStreams {
    std::mt19937_64 arrivals;
    std::mt19937_64 decode;

    static RandomStreams for_replication(std::uint64_t base_seed, std::uint64_t replication) {
        return RandomStreams{std::mt19937_64(mix_seed(base_seed, replication, 0)),
                             std::mt19937_64(mix_seed(base_seed, replication, 1))};
    }
};

}  // namespace aoi
