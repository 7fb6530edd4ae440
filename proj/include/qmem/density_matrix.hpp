#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "qmem/states.hpp"

namespace qmem {

// Single-qubit density operator.
struct DensityMatrix {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity() * 0.5;

    static DensityMatrix from_state(const QubitState& psi);

    // rho = (I + sx X + sy Y + sz Z) / 2. Requires |s| <= 1 (within 1e-9).
    static DensityMatrix from_stokes(double sx, double sy, double sz);

    // Inverse of from_stokes: (sx, sy, sz).
    std::array<double, 3> stokes() const;

    // Hermitian within tol, unit trace within tol, eigenvalues >= -tol.
    bool is_physical(double tol = 1e-9) const;

    // Clip a single negative eigenvalue to zero and renormalize the trace.
    // Identity on already-physical matrices.
    DensityMatrix projected_physical() const;

    std::string to_json() const;
    static DensityMatrix from_json(const std::string& text);
};

// <psi|rho|psi> for a pure target. Throws UsageError when rho is not a
// physical density matrix (this function never clamps) or when psi is not
// normalized.
double fidelity(const DensityMatrix& rho, const QubitState& psi);

} // namespace qmem
