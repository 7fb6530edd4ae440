#include "qmem/bound.hpp"

#include <cmath>
#include <string>

#include "qmem/errors.hpp"

namespace qmem {

double fock_fidelity(int n) {
    if (n < 0)
        throw UsageError("photon number must be non-negative");
    return (n + 1.0) / (n + 2.0);
}

namespace {

double poisson_weight(int n, double nbar) {
    return std::exp(n * std::log(nbar) - nbar - std::lgamma(n + 1.0));
}

int top_photon_number(double nbar) {
    return static_cast<int>(std::ceil(nbar + 12.0 * std::sqrt(nbar))) + 30;
}

} // namespace

BoundResult classical_bound(double nbar, double p_succ) {
    if (!(nbar > 0.0))
        throw UsageError("mean photon number must be positive");
    if (!(p_succ > 0.0 && p_succ <= 1.0))
        throw UsageError("success probability must lie in (0, 1]");

    BoundResult r;
    r.nbar = nbar;
    r.p_succ = p_succ;

    // The adversary claims success on the largest photon numbers first,
    // where measure-and-prepare works best. Walk down from a photon number
    // whose upper tail is negligible; that tail mass rides along in the top
    // allocation entry.
    int n_top = top_photon_number(nbar);
    double tail = 1.0;
    for (int n = 0; n <= n_top; ++n) tail -= poisson_weight(n, nbar);
    tail = std::max(0.0, tail);

    double remaining = p_succ;
    double weighted_f = 0.0;
    for (int n = n_top; n >= 0 && remaining > 0.0; --n) {
        double w = poisson_weight(n, nbar);
        if (n == n_top) w += tail;
        w = std::min(w, remaining);
        if (w <= 0.0) continue;
        r.allocation.push_back({n, w});
        weighted_f += w * fock_fidelity(n);
        remaining -= w;
    }
    if (remaining > 1e-9)
        throw AnalysisError("success probability exceeds available photon statistics");
    r.f_b = weighted_f / p_succ;
    return r;
}

double solve_p_succ(double f_b_target, double nbar, double tol) {
    if (!(nbar > 0.0))
        throw UsageError("mean photon number must be positive");
    if (!(tol > 0.0))
        throw UsageError("tolerance must be positive");

    const double lo_limit = 1e-60;
    double f_top = classical_bound(nbar, lo_limit).f_b;
    double f_bottom = classical_bound(nbar, 1.0).f_b;
    if (f_b_target >= f_top)
        throw AnalysisError("bound target " + std::to_string(f_b_target) +
                            " not attainable at this mean photon number");
    if (f_b_target <= f_bottom)
        throw AnalysisError("bound target " + std::to_string(f_b_target) +
                            " below the unconditional bound " +
                            std::to_string(f_bottom));

    // classical_bound is monotone decreasing in p_succ; bisect in log space
    // because the solution can span many decades.
    double lo = lo_limit, hi = 1.0;
    while (hi / lo > 1.0 + tol) {
        double mid = std::sqrt(lo * hi);
        if (classical_bound(nbar, mid).f_b > f_b_target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

} // namespace qmem
