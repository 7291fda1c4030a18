#pragma once

#include <cstdint>

namespace qramsey {

// Counter-based generator: every draw is a pure function of (seed, counter),
// so point-indexed decisions are identical at any worker count or order.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_point(std::uint64_t seed, std::uint64_t counter) {
    return mix64(mix64(seed) ^ mix64(counter * 0xd6e8feb86659fd93ull + 0x2545f4914f6cdd1dull));
}

// Sequential stream view over the same keyed function.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(mix64(seed ^ mix64(stream))), ctr_(0) {}

    std::uint64_t next_u64() { return hash_point(seed_, ctr_++); }

    // uniform in [0, bound)
    std::uint64_t next_below(std::uint64_t bound) {
        // rejection-free multiply-shift; bias < 2^-64, fine for test workloads
        unsigned __int128 m = (unsigned __int128)next_u64() * bound;
        return (std::uint64_t)(m >> 64);
    }

    double next_unit() { return (next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t seed_;
    std::uint64_t ctr_;
};

}  // namespace qramsey
