#include "qmem/states.hpp"

#include <cmath>

#include "qmem/errors.hpp"

namespace qmem {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
} // namespace

QubitState canonical_state(StateName name, BasisLabel basis) {
    using cd = std::complex<double>;
    QubitState s;
    s.basis = basis;
    switch (name) {
    case StateName::Zero:   s.a0 = 1.0;       s.a1 = 0.0; break;
    case StateName::One:    s.a0 = 0.0;       s.a1 = 1.0; break;
    case StateName::PlusX:  s.a0 = kInvSqrt2; s.a1 = cd(kInvSqrt2, 0.0); break;
    case StateName::MinusX: s.a0 = kInvSqrt2; s.a1 = cd(-kInvSqrt2, 0.0); break;
    case StateName::PlusY:  s.a0 = kInvSqrt2; s.a1 = cd(0.0, kInvSqrt2); break;
    case StateName::MinusY: s.a0 = kInvSqrt2; s.a1 = cd(0.0, -kInvSqrt2); break;
    }
    return s;
}

double norm_squared(const QubitState& s) {
    return std::norm(s.a0) + std::norm(s.a1);
}

QubitState normalized(const QubitState& s) {
    double n2 = norm_squared(s);
    if (n2 <= 0.0)
        throw UsageError("cannot normalize a null qubit state");
    double inv = 1.0 / std::sqrt(n2);
    QubitState out = s;
    out.a0 *= inv;
    out.a1 *= inv;
    return out;
}

double projection_probability(const QubitState& psi, const QubitState& b) {
    if (psi.basis != b.basis)
        throw UsageError(std::string("basis mismatch in projection: ") +
                         to_string(psi.basis) + " vs " + to_string(b.basis));
    if (std::abs(norm_squared(psi) - 1.0) > 1e-9 ||
        std::abs(norm_squared(b) - 1.0) > 1e-9)
        throw UsageError("projection requires normalized states");
    std::complex<double> amp = std::conj(b.a0) * psi.a0 + std::conj(b.a1) * psi.a1;
    return std::norm(amp);
}

const char* to_string(StateName name) {
    switch (name) {
    case StateName::Zero:   return "0";
    case StateName::One:    return "1";
    case StateName::PlusX:  return "X";
    case StateName::MinusX: return "-X";
    case StateName::PlusY:  return "Y";
    case StateName::MinusY: return "-Y";
    }
    return "?";
}

const char* to_string(BasisLabel basis) {
    return basis == BasisLabel::Path ? "path" : "timebin";
}

StateName state_name_from_string(const std::string& s) {
    if (s == "0") return StateName::Zero;
    if (s == "1") return StateName::One;
    if (s == "X" || s == "+X") return StateName::PlusX;
    if (s == "-X") return StateName::MinusX;
    if (s == "Y" || s == "+Y") return StateName::PlusY;
    if (s == "-Y") return StateName::MinusY;
    throw UsageError("unknown state name '" + s + "' (expected 0, 1, X, -X, Y, -Y)");
}

} // namespace qmem
