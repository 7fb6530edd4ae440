#pragma once

#include <cstdint>

namespace qmem {

// Small deterministic generator used for all sampling. Keeping the generator
// and the Poisson sampler in-tree pins histogram bytes to (seed, stream id)
// across platforms and standard libraries.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in (0, 1) (never exactly 0 or 1).
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Decorrelated per-stream seed so independent histograms never share a
// generator sequence.
std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t stream_id);

// Poisson-distributed draw with the given mean. Product method for small
// means, transformed rejection (PTRS) for large ones. mean < 0 is a usage
// error; mean == 0 returns 0.
std::uint64_t poisson_draw(SplitMix64& rng, double mean);

} // namespace qmem
