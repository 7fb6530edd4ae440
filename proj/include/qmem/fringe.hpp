#pragma once

#include <vector>

namespace qmem {

struct FringePoint {
    double dphi_rad = 0.0;
    double c_s = 0.0;   // windowed counts per trial at this phase
    double sigma = 0.0; // 1-sigma uncertainty of c_s (0 on every point = unweighted)
};

struct FringeFit {
    double amplitude = 0.0;  // A in c = A (1 + V cos(phi + phi0))
    double visibility = 0.0; // V, clamped to [0, 1]
    double phi0 = 0.0;       // fringe phase offset, in (-pi, pi]
    double amplitude_err = 0.0;
    double visibility_err = 0.0;
    double phi0_err = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    std::vector<double> residuals; // data minus model, point order preserved
};

// Weighted least-squares fit of c(phi) = A (1 + V cos(phi + phi0)). Needs at
// least 6 points spanning at least 2*pi of phase. When sampling noise drives
// the unconstrained solution above V = 1, the fit is repeated on the V = 1
// boundary. Uncertainties come from the parameter covariance at the optimum
// (residual-scaled when the points carry no sigmas).
FringeFit fit_fringe(const std::vector<FringePoint>& points);

// Visibility of an interference fringe whose constructive-peak signal is s
// over a flat background b in the same window: s / (s + 2 b). This is what
// fit_fringe converges to for a noise-diluted ideal fringe.
double closed_form_visibility(double s, double b);

} // namespace qmem
