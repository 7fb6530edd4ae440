#include "qmem/density_matrix.hpp"

#include <cmath>
#include <json.hpp>

#include "qmem/errors.hpp"

namespace qmem {

using cd = std::complex<double>;

DensityMatrix DensityMatrix::from_state(const QubitState& psi) {
    QubitState n = normalized(psi);
    DensityMatrix rho;
    rho.m(0, 0) = std::norm(n.a0);
    rho.m(0, 1) = n.a0 * std::conj(n.a1);
    rho.m(1, 0) = n.a1 * std::conj(n.a0);
    rho.m(1, 1) = std::norm(n.a1);
    return rho;
}

DensityMatrix DensityMatrix::from_stokes(double sx, double sy, double sz) {
    double r = std::sqrt(sx * sx + sy * sy + sz * sz);
    if (r > 1.0 + 1e-9)
        throw UsageError("Stokes vector length " + std::to_string(r) +
                         " exceeds 1; not a physical state");
    DensityMatrix rho;
    rho.m(0, 0) = 0.5 * (1.0 + sz);
    rho.m(1, 1) = 0.5 * (1.0 - sz);
    rho.m(0, 1) = 0.5 * cd(sx, -sy);
    rho.m(1, 0) = 0.5 * cd(sx, sy);
    return rho;
}

std::array<double, 3> DensityMatrix::stokes() const {
    double sx = 2.0 * m(0, 1).real();
    double sy = -2.0 * m(0, 1).imag();
    double sz = (m(0, 0) - m(1, 1)).real();
    return {sx, sy, sz};
}

bool DensityMatrix::is_physical(double tol) const {
    if (std::abs((m(0, 0) + m(1, 1)).real() - 1.0) > tol) return false;
    if (std::abs((m(0, 0) + m(1, 1)).imag()) > tol) return false;
    if ((m - m.adjoint()).norm() > tol) return false;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

DensityMatrix DensityMatrix::projected_physical() const {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m);
    Eigen::Vector2d ev = es.eigenvalues();
    if (ev(0) >= 0.0 && ev(1) >= 0.0) {
        DensityMatrix out;
        out.m = m / (ev(0) + ev(1));
        return out;
    }
    // One eigenvalue of a unit-trace 2x2 Hermitian matrix can be negative;
    // drop it and renormalize what remains.
    Eigen::Vector2d clipped = ev.cwiseMax(0.0);
    double total = clipped.sum();
    if (total <= 0.0)
        throw AnalysisError("density matrix has no positive eigenvalue");
    DensityMatrix out;
    out.m = es.eigenvectors() * (clipped / total).asDiagonal() *
            es.eigenvectors().adjoint();
    return out;
}

std::string DensityMatrix::to_json() const {
    nlohmann::json j;
    j["re"] = {{m(0, 0).real(), m(0, 1).real()}, {m(1, 0).real(), m(1, 1).real()}};
    j["im"] = {{m(0, 0).imag(), m(0, 1).imag()}, {m(1, 0).imag(), m(1, 1).imag()}};
    return j.dump();
}

DensityMatrix DensityMatrix::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError(std::string("invalid density matrix JSON: ") + e.what());
    }
    if (!j.contains("re") || !j.contains("im"))
        throw UsageError("density matrix JSON must contain 're' and 'im' 2x2 arrays");
    DensityMatrix rho;
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k)
            rho.m(i, k) = cd(j["re"].at(i).at(k).get<double>(),
                             j["im"].at(i).at(k).get<double>());
    return rho;
}

double fidelity(const DensityMatrix& rho, const QubitState& psi) {
    if (!rho.is_physical())
        throw UsageError("fidelity requires a physical density matrix "
                         "(hermitian, unit trace, positive semidefinite)");
    if (std::abs(norm_squared(psi) - 1.0) > 1e-9)
        throw UsageError("fidelity requires a normalized target state");
    Eigen::Vector2cd v(psi.a0, psi.a1);
    return (v.adjoint() * rho.m * v)(0, 0).real();
}

} // namespace qmem
