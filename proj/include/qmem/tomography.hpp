#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "qmem/density_matrix.hpp"
#include "qmem/states.hpp"

namespace qmem {

// Windowed counts for the six analysis settings, indexed per
// kCardinalStates: 0, 1, X, -X, Y, -Y.
struct TomographyInput {
    std::array<double, 6> counts{};
    double t_window_ns = 270.0;
    double n_trials = 0.0;       // trials behind each setting's histogram
    double noise_rate_per_ns = 0.0; // device noise floor (for optional baseline)
};

struct ReconstructOptions {
    // Subtract the expected flat-noise baseline (rate * window * trials)
    // from every setting before forming Stokes components. Off by default:
    // reported fidelities are raw, noise included.
    bool subtract_noise_baseline = false;
};

// Linear-inversion state estimate from the three conjugate count pairs, with
// a physicality projection (clip one negative eigenvalue, renormalize) when
// sampling noise pushes the Stokes vector outside the Bloch ball. A
// conjugate pair with zero total counts is an AnalysisError.
DensityMatrix reconstruct(const TomographyInput& input,
                          const ReconstructOptions& opt = {});

struct FidelityEstimate {
    double f_hat = 0.0;     // fidelity of the reconstruction
    double err_plus = 0.0;  // 84th-percentile offset, >= 0
    double err_minus = 0.0; // 16th-percentile offset, >= 0
    std::size_t n_mc = 0;
    std::size_t failures = 0; // resamples that could not be reconstructed
};

// Monte-Carlo uncertainty: resample each setting's counts as Poisson with
// the observed mean, reconstruct, and read the 16/84 percentiles of the
// fidelity against the target. More than 1% failed resamples is an
// AnalysisError.
FidelityEstimate mc_fidelity(const TomographyInput& input, const QubitState& target,
                             std::size_t n_mc, std::uint64_t seed,
                             const ReconstructOptions& opt = {});

// Violation of a classical bound f_b by a measured fidelity with asymmetric
// Monte-Carlo errors: S = (f - f_b) / sigma with sigma the mean of the two
// error offsets. sigma == 0 is an AnalysisError.
struct Violation {
    double s = 0.0;
    double sigma = 0.0;
};
Violation violation(double fidelity, double err_plus, double err_minus, double f_b);

} // namespace qmem
