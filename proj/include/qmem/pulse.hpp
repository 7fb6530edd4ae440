#pragma once

#include <vector>

namespace qmem {

// Temporal shape of the retrieved (detected) pulse. Dispersive broadening in
// the memory stretches the 133 ns input pulse into a wider two-sided
// profile; both shapes below are parameterized by their FWHM.
enum class PulseShape { Lorentzian, TwoSidedExponential };

struct PulseProfile {
    PulseShape shape = PulseShape::TwoSidedExponential;
    double fwhm_ns = 133.0;
    double center_ns = 0.0;
    // Detector acquisition gate: density is truncated to
    // [center - halfspan, center + halfspan] and renormalized over that
    // support. halfspan <= 0 means untruncated.
    double support_halfspan_ns = 0.0;
};

// CDF of the profile evaluated at absolute time t_ns.
double profile_cdf(const PulseProfile& p, double t_ns);

// Inverse CDF (quantile) for u in (0, 1); used for per-click sampling.
double profile_quantile(const PulseProfile& p, double u);

// Fraction of the pulse falling in a window of full width t_window_ns
// centered on the pulse. 0 at t=0, monotone in t, and -> 1 for wide windows
// (exactly 1 at twice the gate halfspan when truncated). t_window_ns < 0 is
// a usage error.
double window_fraction(const PulseProfile& p, double t_window_ns);

struct ContainmentTarget {
    double t_window_ns = 0.0;
    double fraction = 0.0; // target window_fraction at that width
};

// Least-squares fit of the profile FWHM to measured containment fractions.
// Returns the fitted FWHM in ns. Targets must be non-empty with windows > 0
// and fractions in (0, 1).
double calibrate_broadening(const std::vector<ContainmentTarget>& targets,
                            PulseShape shape, double support_halfspan_ns);

} // namespace qmem
