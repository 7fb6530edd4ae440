#include "qmem/rng.hpp"

#include <cmath>

#include "qmem/errors.hpp"

namespace qmem {

std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    SplitMix64 g(master_seed ^ (0x9E3779B97F4A7C15ULL * (stream_id + 0x632BE59BD9B4E019ULL)));
    g.next_u64();
    return g.next_u64();
}

namespace {

// Knuth product-of-uniforms; fine up to mean ~10.
std::uint64_t poisson_small(SplitMix64& rng, double mean) {
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        p *= rng.next_unit();
        if (p <= limit) return k;
        ++k;
    } while (k < 2000);
    return k;
}

// Hoermann's PTRS transformed-rejection sampler for mean >= 10.
std::uint64_t poisson_ptrs(SplitMix64& rng, double mean) {
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        double u = rng.next_unit() - 0.5;
        double v = rng.next_unit();
        double us = 0.5 - std::abs(u);
        double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            k * log_mean - mean - std::lgamma(k + 1.0))
            return static_cast<std::uint64_t>(k);
    }
}

} // namespace

std::uint64_t poisson_draw(SplitMix64& rng, double mean) {
    if (mean < 0.0)
        throw UsageError("Poisson mean must be non-negative");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_small(rng, mean);
    return poisson_ptrs(rng, mean);
}

} // namespace qmem
