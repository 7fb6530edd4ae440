#include "qmem/pulse.hpp"

#include <algorithm>
#include <cmath>

#include "qmem/errors.hpp"

namespace qmem {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;

// CDF of the untruncated shape, centered at 0.
double base_cdf(PulseShape shape, double fwhm, double t) {
    if (shape == PulseShape::Lorentzian) {
        double gamma = 0.5 * fwhm; // half width at half maximum
        return 0.5 + std::atan(t / gamma) / kPi;
    }
    // Two-sided exponential (Laplace): density ~ exp(-|t| / b), fwhm = 2 b ln2.
    double b = fwhm / (2.0 * kLn2);
    return t < 0.0 ? 0.5 * std::exp(t / b) : 1.0 - 0.5 * std::exp(-t / b);
}

double base_quantile(PulseShape shape, double fwhm, double u) {
    if (shape == PulseShape::Lorentzian) {
        double gamma = 0.5 * fwhm;
        return gamma * std::tan(kPi * (u - 0.5));
    }
    double b = fwhm / (2.0 * kLn2);
    return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
}

void check_profile(const PulseProfile& p) {
    if (!(p.fwhm_ns > 0.0))
        throw UsageError("pulse profile FWHM must be positive");
}

} // namespace

double profile_cdf(const PulseProfile& p, double t_ns) {
    check_profile(p);
    double t = t_ns - p.center_ns;
    if (p.support_halfspan_ns <= 0.0)
        return base_cdf(p.shape, p.fwhm_ns, t);
    double h = p.support_halfspan_ns;
    if (t <= -h) return 0.0;
    if (t >= h) return 1.0;
    double lo = base_cdf(p.shape, p.fwhm_ns, -h);
    double hi = base_cdf(p.shape, p.fwhm_ns, h);
    return (base_cdf(p.shape, p.fwhm_ns, t) - lo) / (hi - lo);
}

double profile_quantile(const PulseProfile& p, double u) {
    check_profile(p);
    if (!(u > 0.0 && u < 1.0))
        throw UsageError("quantile argument must lie in (0, 1)");
    if (p.support_halfspan_ns <= 0.0)
        return p.center_ns + base_quantile(p.shape, p.fwhm_ns, u);
    double h = p.support_halfspan_ns;
    double lo = base_cdf(p.shape, p.fwhm_ns, -h);
    double hi = base_cdf(p.shape, p.fwhm_ns, h);
    double t = base_quantile(p.shape, p.fwhm_ns, lo + u * (hi - lo));
    return p.center_ns + std::clamp(t, -h, h);
}

double window_fraction(const PulseProfile& p, double t_window_ns) {
    check_profile(p);
    if (t_window_ns < 0.0)
        throw UsageError("window width must be non-negative");
    double half = 0.5 * t_window_ns;
    return profile_cdf(p, p.center_ns + half) - profile_cdf(p, p.center_ns - half);
}

double calibrate_broadening(const std::vector<ContainmentTarget>& targets,
                            PulseShape shape, double support_halfspan_ns) {
    if (targets.empty())
        throw UsageError("calibration requires at least one containment target");
    for (const auto& t : targets) {
        if (!(t.t_window_ns > 0.0))
            throw UsageError("containment target window must be positive");
        if (!(t.fraction > 0.0 && t.fraction < 1.0))
            throw UsageError("containment target fraction must lie in (0, 1)");
    }

    auto loss = [&](double log_fwhm) {
        PulseProfile p;
        p.shape = shape;
        p.fwhm_ns = std::exp(log_fwhm);
        p.support_halfspan_ns = support_halfspan_ns;
        double s = 0.0;
        for (const auto& t : targets) {
            double r = window_fraction(p, t.t_window_ns) - t.fraction;
            s += r * r;
        }
        return s;
    };

    // Golden-section search on log-FWHM; the residual is smooth and unimodal
    // over this bracket because every window fraction is monotone in FWHM.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = std::log(1e-2), b = std::log(1e6);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = loss(c), fd = loss(d);
    for (int i = 0; i < 200; ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = loss(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = loss(d);
        }
    }
    return std::exp(0.5 * (a + b));
}

} // namespace qmem
