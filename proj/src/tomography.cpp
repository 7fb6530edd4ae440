#include "qmem/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "qmem/errors.hpp"
#include "qmem/rng.hpp"

namespace qmem {

namespace {

// Percentile with linear interpolation between order statistics.
double percentile(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

DensityMatrix reconstruct_from(const std::array<double, 6>& counts, double baseline) {
    double s[3];
    static const char* axis_name[3] = {"0/1", "X/-X", "Y/-Y"};
    for (int axis = 0; axis < 3; ++axis) {
        double plus = std::max(0.0, counts[2 * axis] - baseline);
        double minus = std::max(0.0, counts[2 * axis + 1] - baseline);
        double total = plus + minus;
        if (total <= 0.0)
            throw AnalysisError(std::string("conjugate pair ") + axis_name[axis] +
                                " has no counts; cannot reconstruct");
        s[axis] = (plus - minus) / total;
    }
    // Raw linear inversion, then project back to the Bloch ball if sampling
    // noise pushed it outside. Stokes index order is (z, x, y) here because
    // the count vector leads with the poles.
    DensityMatrix raw;
    raw.m(0, 0) = 0.5 * (1.0 + s[0]);
    raw.m(1, 1) = 0.5 * (1.0 - s[0]);
    raw.m(0, 1) = 0.5 * std::complex<double>(s[1], -s[2]);
    raw.m(1, 0) = 0.5 * std::complex<double>(s[1], s[2]);
    return raw.projected_physical();
}

} // namespace

DensityMatrix reconstruct(const TomographyInput& input, const ReconstructOptions& opt) {
    for (double c : input.counts)
        if (c < 0.0 || !std::isfinite(c))
            throw UsageError("tomography counts must be finite and non-negative");
    double baseline = 0.0;
    if (opt.subtract_noise_baseline) {
        if (input.n_trials <= 0.0)
            throw UsageError("baseline subtraction requires the trial count");
        baseline = input.noise_rate_per_ns * input.t_window_ns * input.n_trials;
    }
    return reconstruct_from(input.counts, baseline);
}

FidelityEstimate mc_fidelity(const TomographyInput& input, const QubitState& target,
                             std::size_t n_mc, std::uint64_t seed,
                             const ReconstructOptions& opt) {
    if (n_mc < 2)
        throw UsageError("Monte-Carlo resampling needs at least 2 samples");

    FidelityEstimate est;
    est.n_mc = n_mc;
    est.f_hat = fidelity(reconstruct(input, opt), target);

    double baseline = 0.0;
    if (opt.subtract_noise_baseline)
        baseline = input.noise_rate_per_ns * input.t_window_ns * input.n_trials;

    SplitMix64 rng(derive_stream(seed, 0));
    std::vector<double> samples;
    samples.reserve(n_mc);
    for (std::size_t i = 0; i < n_mc; ++i) {
        std::array<double, 6> resampled{};
        for (int k = 0; k < 6; ++k)
            resampled[static_cast<std::size_t>(k)] = static_cast<double>(
                poisson_draw(rng, input.counts[static_cast<std::size_t>(k)]));
        try {
            samples.push_back(fidelity(reconstruct_from(resampled, baseline), target));
        } catch (const AnalysisError&) {
            ++est.failures;
        }
    }
    if (est.failures * 100 > n_mc)
        throw AnalysisError("more than 1% of Monte-Carlo resamples were degenerate");
    if (samples.size() < 2)
        throw AnalysisError("too few successful Monte-Carlo resamples");

    std::sort(samples.begin(), samples.end());
    est.err_minus = std::max(0.0, est.f_hat - percentile(samples, 0.16));
    est.err_plus = std::max(0.0, percentile(samples, 0.84) - est.f_hat);
    return est;
}

Violation violation(double fid, double err_plus, double err_minus, double f_b) {
    if (err_plus < 0.0 || err_minus < 0.0)
        throw UsageError("error offsets must be non-negative");
    double sigma = 0.5 * (err_plus + err_minus);
    if (sigma <= 0.0)
        throw AnalysisError("zero uncertainty; violation score undefined");
    return {(fid - f_b) / sigma, sigma};
}

} // namespace qmem
