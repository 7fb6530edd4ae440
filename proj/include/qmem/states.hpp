#pragma once

#include <complex>
#include <string>

namespace qmem {

// Which physical degree of freedom carries the qubit. Path qubits live in a
// superposition across the two cells of a pair; time-bin qubits live in the
// early/late temporal modes of a single cell.
enum class BasisLabel { Path, TimeBin };

// The six cardinal tomography states. Zero/One are the computational poles
// (cell a / cell b, or early / late bin).
enum class StateName { Zero, One, PlusX, MinusX, PlusY, MinusY };

// Pure qubit state |psi> = a0|0> + a1|1>.
struct QubitState {
    std::complex<double> a0{1.0, 0.0};
    std::complex<double> a1{0.0, 0.0};
    BasisLabel basis = BasisLabel::Path;
};

// Canonical amplitudes for the six cardinal states with a fixed global phase:
// a0 is real and non-negative (a1 = 1 when a0 vanishes).
QubitState canonical_state(StateName name, BasisLabel basis);

// Born probability |<b|psi>|^2 of finding `psi` in the analysis state `b`.
// Throws UsageError if the basis labels differ or either state is not
// normalized to 1 within 1e-9.
double projection_probability(const QubitState& psi, const QubitState& b);

double norm_squared(const QubitState& s);
QubitState normalized(const QubitState& s);

const char* to_string(StateName name);
const char* to_string(BasisLabel basis);
StateName state_name_from_string(const std::string& s);

// All six cardinal states in a fixed order: 0, 1, X, -X, Y, -Y. This is also
// the index convention used by tomography count vectors.
constexpr StateName kCardinalStates[6] = {
    StateName::Zero, StateName::One,   StateName::PlusX,
    StateName::MinusX, StateName::PlusY, StateName::MinusY,
};

} // namespace qmem
