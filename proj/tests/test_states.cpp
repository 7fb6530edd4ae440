#include <doctest.h>

#include <cmath>

#include "qmem/density_matrix.hpp"
#include "qmem/errors.hpp"
#include "qmem/rng.hpp"
#include "qmem/states.hpp"

using namespace qmem;

TEST_CASE("canonical states are normalized with a non-negative leading amplitude") {
    for (StateName n : kCardinalStates) {
        QubitState s = canonical_state(n, BasisLabel::Path);
        CHECK(norm_squared(s) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.a0.imag() == 0.0);
        CHECK(s.a0.real() >= 0.0);
    }
}

TEST_CASE("projection probabilities across the cardinal grid") {
    // Same state -> 1, conjugate partner -> 0, any other cardinal pair -> 1/2
    // (the three bases are mutually unbiased).
    auto partner = [](StateName n) {
        switch (n) {
        case StateName::Zero: return StateName::One;
        case StateName::One: return StateName::Zero;
        case StateName::PlusX: return StateName::MinusX;
        case StateName::MinusX: return StateName::PlusX;
        case StateName::PlusY: return StateName::MinusY;
        default: return StateName::PlusY;
        }
    };
    for (StateName a : kCardinalStates) {
        for (StateName b : kCardinalStates) {
            double p = projection_probability(canonical_state(a, BasisLabel::Path),
                                              canonical_state(b, BasisLabel::Path));
            double expect = (a == b) ? 1.0 : (partner(a) == b ? 0.0 : 0.5);
            CHECK(p == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("projection rejects mismatched bases and unnormalized states") {
    QubitState path_x = canonical_state(StateName::PlusX, BasisLabel::Path);
    QubitState tb_x = canonical_state(StateName::PlusX, BasisLabel::TimeBin);
    CHECK_THROWS_AS(projection_probability(path_x, tb_x), UsageError);

    QubitState bad = path_x;
    bad.a0 *= 2.0;
    CHECK_THROWS_AS(projection_probability(bad, path_x), UsageError);
    CHECK(norm_squared(normalized(bad)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("state names round-trip through strings") {
    for (StateName n : kCardinalStates)
        CHECK(state_name_from_string(to_string(n)) == n);
    CHECK_THROWS_AS(state_name_from_string("Q"), UsageError);
}

TEST_CASE("fidelity of pure and maximally mixed states") {
    QubitState x = canonical_state(StateName::PlusX, BasisLabel::Path);
    CHECK(fidelity(DensityMatrix::from_state(x), x) == doctest::Approx(1.0).epsilon(1e-12));

    DensityMatrix mixed; // defaults to I/2
    for (StateName n : kCardinalStates)
        CHECK(fidelity(mixed, canonical_state(n, BasisLabel::Path)) ==
              doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fidelity of a 9:1 mixture against its majority component is 0.9") {
    QubitState x = canonical_state(StateName::PlusX, BasisLabel::Path);
    QubitState mx = canonical_state(StateName::MinusX, BasisLabel::Path);
    DensityMatrix rho;
    rho.m = 0.9 * DensityMatrix::from_state(x).m + 0.1 * DensityMatrix::from_state(mx).m;
    CHECK(fidelity(rho, x) == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("fidelity rejects unphysical inputs") {
    DensityMatrix neg;
    neg.m << 1.05, 0.3, 0.3, -0.05; // hermitian, unit trace, one eigenvalue < 0
    QubitState x = canonical_state(StateName::PlusX, BasisLabel::Path);
    CHECK_THROWS_AS(fidelity(neg, x), UsageError);

    QubitState bad = x;
    bad.a1 *= 1.5;
    CHECK_THROWS_AS(fidelity(DensityMatrix::from_state(x), bad), UsageError);
}

TEST_CASE("Stokes decomposition round-trips") {
    auto check_roundtrip = [](double sx, double sy, double sz) {
        DensityMatrix rho = DensityMatrix::from_stokes(sx, sy, sz);
        auto s = rho.stokes();
        CHECK(s[0] == doctest::Approx(sx).epsilon(1e-12));
        CHECK(s[1] == doctest::Approx(sy).epsilon(1e-12));
        CHECK(s[2] == doctest::Approx(sz).epsilon(1e-12));
        CHECK(rho.is_physical());
    };
    check_roundtrip(0.0, 0.0, 0.0);
    check_roundtrip(1.0, 0.0, 0.0);
    check_roundtrip(0.3, -0.4, 0.5);
    check_roundtrip(0.0, -1.0, 0.0);

    for (StateName n : kCardinalStates) {
        DensityMatrix rho =
            DensityMatrix::from_state(canonical_state(n, BasisLabel::Path));
        auto s = rho.stokes();
        DensityMatrix back = DensityMatrix::from_stokes(s[0], s[1], s[2]);
        CHECK((rho.m - back.m).norm() < 1e-12);
    }

    CHECK_THROWS_AS(DensityMatrix::from_stokes(1.1, 0.0, 0.0), UsageError);
}

TEST_CASE("physicality projection clips one negative eigenvalue") {
    // A Stokes vector of length 1.25 is what a noisy reconstruction can
    // produce; the projection must land on the closest pure state.
    DensityMatrix raw;
    raw.m << 0.5, 0.625, 0.625, 0.5;
    CHECK_FALSE(raw.is_physical());
    DensityMatrix fixed = raw.projected_physical();
    CHECK(fixed.is_physical());
    auto s = fixed.stokes();
    CHECK(std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(fidelity(fixed, canonical_state(StateName::PlusX, BasisLabel::Path)) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("density matrix JSON round-trips") {
    DensityMatrix rho = DensityMatrix::from_stokes(0.2, -0.3, 0.4);
    DensityMatrix back = DensityMatrix::from_json(rho.to_json());
    CHECK((rho.m - back.m).norm() == 0.0);

    CHECK_THROWS_AS(DensityMatrix::from_json("not json"), UsageError);
    CHECK_THROWS_AS(DensityMatrix::from_json("{\"re\": [[1,0],[0,0]]}"), UsageError);
}

TEST_CASE("generator streams are deterministic and decorrelated") {
    SplitMix64 a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CHECK(derive_stream(7, 0) != derive_stream(7, 1));
    CHECK(derive_stream(7, 0) != derive_stream(8, 0));
    CHECK(derive_stream(7, 3) == derive_stream(7, 3));

    SplitMix64 u(123);
    for (int i = 0; i < 1000; ++i) {
        double v = u.next_unit();
        CHECK(v > 0.0);
        CHECK(v < 1.0);
    }
}

TEST_CASE("Poisson sampler matches its mean and variance") {
    SplitMix64 zero_rng(1);
    CHECK(poisson_draw(zero_rng, 0.0) == 0); // mean 0 -> always 0
    SplitMix64 rng(20260816);

    auto sample_stats = [&](double mean, int n) {
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            auto k = static_cast<double>(poisson_draw(rng, mean));
            sum += k;
            sum2 += k * k;
        }
        double m = sum / n;
        return std::pair<double, double>{m, sum2 / n - m * m};
    };

    // Small-mean (product method) regime.
    auto [m4, v4] = sample_stats(4.0, 20000);
    CHECK(m4 == doctest::Approx(4.0).epsilon(0.02));
    CHECK(v4 == doctest::Approx(4.0).epsilon(0.06));

    // Large-mean (transformed rejection) regime.
    auto [m500, v500] = sample_stats(500.0, 20000);
    CHECK(m500 == doctest::Approx(500.0).epsilon(0.002));
    CHECK(v500 == doctest::Approx(500.0).epsilon(0.06));

    SplitMix64 r2(5);
    CHECK_THROWS_AS(poisson_draw(r2, -1.0), UsageError);
}
