#pragma once

#include <vector>

namespace qmem {

// Best single-copy fidelity a measure-and-prepare strategy reaches on an
// n-photon input: (n + 1) / (n + 2).
double fock_fidelity(int n);

struct BoundAllocation {
    int n = 0;          // photon number
    double weight = 0.0; // probability mass assigned to this photon number
};

struct BoundResult {
    double f_b = 0.0;    // classical fidelity bound
    double nbar = 0.0;
    double p_succ = 0.0;
    std::vector<BoundAllocation> allocation; // descending n, weights summing to p_succ
};

// Classical measure-and-prepare fidelity bound for a heralded memory that
// succeeds with probability p_succ on Poissonian nbar-photon inputs. An
// adversary assigns success preferentially to the largest photon numbers;
// the bound is the weighted fidelity of that allocation. Requires nbar > 0
// and 0 < p_succ <= 1.
BoundResult classical_bound(double nbar, double p_succ);

// Success probability at which the classical bound equals f_b_target, by
// bisection on the monotone map p_succ -> classical_bound. Targets outside
// the attainable range for this nbar are an AnalysisError.
double solve_p_succ(double f_b_target, double nbar, double tol = 1e-9);

} // namespace qmem
