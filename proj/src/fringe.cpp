#include "qmem/fringe.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_pi(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a - kPi;
}

struct Prepared {
    std::vector<double> w; // per-point weights (1/sigma^2 or 1)
    bool weighted = false;
};

Prepared prepare_weights(const std::vector<FringePoint>& pts) {
    Prepared p;
    bool any_sigma = false, all_sigma = true;
    for (const auto& q : pts) {
        if (q.sigma > 0.0) any_sigma = true;
        else all_sigma = false;
        if (q.sigma < 0.0)
            throw UsageError("fringe point uncertainties must be non-negative");
    }
    if (any_sigma && !all_sigma)
        throw UsageError("fringe points must either all carry uncertainties or none");
    p.weighted = any_sigma;
    p.w.reserve(pts.size());
    for (const auto& q : pts)
        p.w.push_back(p.weighted ? 1.0 / (q.sigma * q.sigma) : 1.0);
    return p;
}

// Best amplitude and loss for the V = 1 boundary at a fixed phase offset.
double boundary_loss(const std::vector<FringePoint>& pts, const std::vector<double>& w,
                     double phi0, double* amplitude) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double g = 1.0 + std::cos(pts[i].dphi_rad + phi0);
        num += w[i] * pts[i].c_s * g;
        den += w[i] * g * g;
    }
    double a = den > 0.0 ? num / den : 0.0;
    if (amplitude) *amplitude = a;
    double loss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double r = pts[i].c_s - a * (1.0 + std::cos(pts[i].dphi_rad + phi0));
        loss += w[i] * r * r;
    }
    return loss;
}

} // namespace

FringeFit fit_fringe(const std::vector<FringePoint>& points) {
    if (points.size() < 6)
        throw UsageError("fringe fit needs at least 6 phase points");
    double lo = points[0].dphi_rad, hi = points[0].dphi_rad;
    for (const auto& p : points) {
        lo = std::min(lo, p.dphi_rad);
        hi = std::max(hi, p.dphi_rad);
    }
    if (hi - lo < 2.0 * kPi - 1e-9)
        throw UsageError("fringe fit needs phases spanning at least one full period");

    Prepared prep = prepare_weights(points);
    const auto n = points.size();

    // Linearize as c = A + B cos(phi) + C sin(phi); the model is
    // A (1 + V cos(phi + phi0)) with B = A V cos(phi0), C = -A V sin(phi0).
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Vector3d row(1.0, std::cos(points[i].dphi_rad), std::sin(points[i].dphi_rad));
        ata += prep.w[i] * row * row.transpose();
        atb += prep.w[i] * row * points[i].c_s;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    if (!lu.isInvertible())
        throw AnalysisError("degenerate phase sampling; fringe fit is singular");
    Eigen::Vector3d sol = lu.solve(atb);

    double a = sol(0);
    if (a <= 0.0)
        throw AnalysisError("fringe fit found a non-positive mean level");
    double v = std::sqrt(sol(1) * sol(1) + sol(2) * sol(2)) / a;
    double phi0 = std::atan2(-sol(2), sol(1));

    if (v > 1.0) {
        // Sampling noise pushed the unconstrained optimum outside the
        // physical range; refit on the V = 1 boundary over phi0.
        double best_phi = 0.0, best_loss = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 64; ++k) {
            double cand = -kPi + 2.0 * kPi * k / 64.0;
            double l = boundary_loss(points, prep.w, cand, nullptr);
            if (l < best_loss) {
                best_loss = l;
                best_phi = cand;
            }
        }
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x0 = best_phi - kPi / 32.0, x3 = best_phi + kPi / 32.0;
        double x1 = x3 - gr * (x3 - x0), x2 = x0 + gr * (x3 - x0);
        double f1 = boundary_loss(points, prep.w, x1, nullptr);
        double f2 = boundary_loss(points, prep.w, x2, nullptr);
        for (int it = 0; it < 80; ++it) {
            if (f1 < f2) {
                x3 = x2; x2 = x1; f2 = f1;
                x1 = x3 - gr * (x3 - x0);
                f1 = boundary_loss(points, prep.w, x1, nullptr);
            } else {
                x0 = x1; x1 = x2; f1 = f2;
                x2 = x0 + gr * (x3 - x0);
                f2 = boundary_loss(points, prep.w, x2, nullptr);
            }
        }
        phi0 = wrap_pi(0.5 * (x1 + x2));
        boundary_loss(points, prep.w, phi0, &a);
        if (a <= 0.0)
            throw AnalysisError("fringe fit found a non-positive mean level");
        v = 1.0;
    }

    FringeFit fit;
    fit.amplitude = a;
    fit.visibility = v;
    fit.phi0 = wrap_pi(phi0);
    fit.dof = static_cast<int>(n) - 3;

    fit.residuals.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double model = a * (1.0 + v * std::cos(points[i].dphi_rad + fit.phi0));
        double r = points[i].c_s - model;
        fit.residuals.push_back(r);
        fit.chi2 += prep.w[i] * r * r;
    }

    // Covariance in (A, V, phi0) from the Gauss-Newton normal matrix at the
    // optimum. On the V = 1 boundary the V column is kept; the quoted error
    // then measures curvature toward the interior.
    Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        double c = std::cos(points[i].dphi_rad + fit.phi0);
        double s = std::sin(points[i].dphi_rad + fit.phi0);
        Eigen::Vector3d jrow(1.0 + v * c, a * c, -a * v * s);
        jtj += prep.w[i] * jrow * jrow.transpose();
    }
    Eigen::FullPivLU<Eigen::Matrix3d> julu(jtj);
    if (julu.isInvertible()) {
        Eigen::Matrix3d cov = julu.inverse();
        double scale = 1.0;
        if (!prep.weighted && fit.dof > 0)
            scale = fit.chi2 / fit.dof; // residual variance stands in for sigma^2
        fit.amplitude_err = std::sqrt(std::max(0.0, cov(0, 0) * scale));
        fit.visibility_err = std::sqrt(std::max(0.0, cov(1, 1) * scale));
        fit.phi0_err = std::sqrt(std::max(0.0, cov(2, 2) * scale));
    }
    return fit;
}

double closed_form_visibility(double s, double b) {
    if (s < 0.0 || b < 0.0)
        throw UsageError("signal and background must be non-negative");
    if (s + 2.0 * b <= 0.0)
        throw UsageError("signal and background cannot both vanish");
    return s / (s + 2.0 * b);
}

} // namespace qmem
