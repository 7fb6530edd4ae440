#include <doctest.h>

#include <cmath>

#include "qmem/array.hpp"
#include "qmem/errors.hpp"
#include "qmem/pulse.hpp"

using namespace qmem;

TEST_CASE("a window as wide as the FWHM holds exactly half the pulse") {
    // For both shapes the density at +/- FWHM/2 is half the peak, and the
    // enclosed mass is exactly 1/2 (closed forms: Lorentzian
    // (2/pi) atan(T/fwhm), two-sided exponential 1 - 2^(-T/fwhm)).
    for (PulseShape shape : {PulseShape::Lorentzian, PulseShape::TwoSidedExponential}) {
        PulseProfile p;
        p.shape = shape;
        p.fwhm_ns = 133.0;
        CHECK(window_fraction(p, 133.0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(window_fraction(p, 0.0) == 0.0);
    }
}

TEST_CASE("untruncated window fractions match the closed forms") {
    PulseProfile lor{PulseShape::Lorentzian, 133.0, 0.0, 0.0};
    PulseProfile exp2{PulseShape::TwoSidedExponential, 133.0, 0.0, 0.0};
    for (double t : {50.0, 270.0, 865.0, 2000.0}) {
        CHECK(window_fraction(lor, t) ==
              doctest::Approx(2.0 / M_PI * std::atan(t / 133.0)).epsilon(1e-12));
        CHECK(window_fraction(exp2, t) ==
              doctest::Approx(1.0 - std::exp2(-t / 133.0)).epsilon(1e-12));
    }
}

TEST_CASE("window fraction is monotone and saturates at the acquisition gate") {
    PulseProfile p{PulseShape::TwoSidedExponential, 409.0, 0.0, 625.0};
    double prev = 0.0;
    for (double t : {100.0, 200.0, 270.0, 500.0, 865.0, 1100.0, 1250.0}) {
        double w = window_fraction(p, t);
        CHECK(w > prev);
        prev = w;
    }
    CHECK(window_fraction(p, 1250.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(window_fraction(p, 5000.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(window_fraction(p, -1.0), UsageError);
}

TEST_CASE("quantile inverts the CDF for truncated and untruncated profiles") {
    for (double halfspan : {0.0, 625.0}) {
        for (PulseShape shape : {PulseShape::Lorentzian, PulseShape::TwoSidedExponential}) {
            PulseProfile p{shape, 287.0, 40.0, halfspan};
            for (double u : {1e-6, 0.02, 0.16, 0.5, 0.84, 0.98, 1.0 - 1e-6}) {
                double t = profile_quantile(p, u);
                CHECK(profile_cdf(p, t) == doctest::Approx(u).epsilon(1e-9));
                if (halfspan > 0.0) {
                    CHECK(t >= p.center_ns - halfspan);
                    CHECK(t <= p.center_ns + halfspan);
                }
            }
        }
    }
    PulseProfile p{PulseShape::Lorentzian, 100.0, 0.0, 0.0};
    CHECK_THROWS_AS(profile_quantile(p, 0.0), UsageError);
    CHECK_THROWS_AS(profile_quantile(p, 1.0), UsageError);
}

TEST_CASE("calibration with a single half-containment anchor recovers the FWHM") {
    double fwhm = calibrate_broadening({{500.0, 0.5}}, PulseShape::Lorentzian, 0.0);
    CHECK(fwhm == doctest::Approx(500.0).epsilon(1e-6));
    fwhm = calibrate_broadening({{500.0, 0.5}}, PulseShape::TwoSidedExponential, 0.0);
    CHECK(fwhm == doctest::Approx(500.0).epsilon(1e-6));
}

TEST_CASE("calibration against the measured containment anchors") {
    double fwhm = calibrate_broadening({{270.0, 0.42}, {865.0, 0.87}},
                                       PulseShape::TwoSidedExponential, 625.0);
    CHECK(fwhm > 380.0);
    CHECK(fwhm < 440.0);
    PulseProfile p{PulseShape::TwoSidedExponential, fwhm, 0.0, 625.0};
    CHECK(window_fraction(p, 270.0) == doctest::Approx(0.42).epsilon(0.02));
    CHECK(window_fraction(p, 865.0) == doctest::Approx(0.87).epsilon(0.02));

    CHECK_THROWS_AS(calibrate_broadening({}, PulseShape::Lorentzian, 0.0), UsageError);
    CHECK_THROWS_AS(calibrate_broadening({{100.0, 1.5}}, PulseShape::Lorentzian, 0.0),
                    UsageError);
}

TEST_CASE("default array: geometry and efficiency profile") {
    ArrayConfig a = default_array(ArrayProfile::CenterPeaked);
    REQUIRE(a.n_cells() == 10);
    CHECK_NOTHROW(a.validate());

    auto detected = [&](int c) {
        return spin_wave_efficiency(a.cell(c)) * a.cell(c).eta_demux;
    };

    // Mirror symmetry about the array center.
    for (int c = 1; c <= 5; ++c) {
        CHECK(spin_wave_efficiency(a.cell(c)) ==
              doctest::Approx(spin_wave_efficiency(a.cell(11 - c))).epsilon(1e-9));
        CHECK(a.cell(c).eta_demux == doctest::Approx(a.cell(11 - c).eta_demux).epsilon(1e-9));
    }

    // Monotone droop away from the center.
    for (int c = 6; c < 10; ++c) CHECK(detected(c) >= detected(c + 1));

    // Center-to-edge pair ratio of 4.6.
    double center = 0.5 * (detected(5) + detected(6));
    double edge = 0.5 * (detected(1) + detected(2));
    CHECK(center / edge == doctest::Approx(4.6).epsilon(1e-3));

    // Spin-wave efficiencies span the measured range inside the band.
    CHECK(spin_wave_efficiency(a.cell(5)) == doctest::Approx(0.067).epsilon(1e-9));
    CHECK(spin_wave_efficiency(a.cell(1)) == doctest::Approx(0.017).epsilon(1e-6));
    for (int c = 1; c <= 10; ++c) {
        double sw = spin_wave_efficiency(a.cell(c));
        CHECK(sw >= a.spin_wave_band_lo);
        CHECK(sw <= a.spin_wave_band_hi);
    }

    // Calibrated pulse width against the containment anchors.
    CHECK(a.output_broadening_ns > 380.0);
    CHECK(a.output_broadening_ns < 440.0);
    PulseProfile p = a.output_profile();
    CHECK(p.support_halfspan_ns == a.acquisition_halfspan_ns);
    CHECK(window_fraction(p, 270.0) == doctest::Approx(0.42).epsilon(0.02));
    CHECK(window_fraction(p, 865.0) == doctest::Approx(0.87).epsilon(0.02));
    CHECK(window_fraction(p, 1250.0) >= 0.99);

    // Signal-only containment ratios that drive the window count ratios.
    CHECK(window_fraction(p, 865.0) / window_fraction(p, 200.0) >= 2.6);
    CHECK(window_fraction(p, 1250.0) / window_fraction(p, 200.0) >= 2.7);
}

TEST_CASE("flat array profile is uniform at mid-band efficiency") {
    ArrayConfig a = default_array(ArrayProfile::Flat);
    for (const auto& c : a.cells) {
        CHECK(spin_wave_efficiency(c) == doctest::Approx(0.04).epsilon(1e-12));
        CHECK(c.eta_demux == 0.4);
    }
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("array validation rejects inconsistent parameters") {
    ArrayConfig a = default_array(ArrayProfile::Flat);
    a.cells[2].eta_cp = 1.5;
    CHECK_THROWS_AS(a.validate(), ConfigError);

    a = default_array(ArrayProfile::Flat);
    a.cells[0].eta_afc = 0.2; // spin-wave efficiency 0.128, above the band
    CHECK_THROWS_AS(a.validate(), ConfigError);

    a = default_array(ArrayProfile::Flat);
    a.output_broadening_ns = 50.0; // narrower than the input pulse
    CHECK_THROWS_AS(a.validate(), ConfigError);

    a = default_array(ArrayProfile::Flat);
    a.timebin_separation_us = 1.0; // bins would overlap the 625 ns gates
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("pair indexing") {
    CHECK(pair_cells(1) == std::pair<int, int>{1, 2});
    CHECK(pair_cells(3) == std::pair<int, int>{5, 6});
    CHECK(pair_cells(5) == std::pair<int, int>{9, 10});
    CHECK_THROWS_AS(pair_cells(6), UsageError);
    CHECK_THROWS_AS(pair_cells(0), UsageError);
}

TEST_CASE("spin-wave efficiency combines the echo and both control pulses") {
    CellParams c;
    c.eta_afc = 0.0625;
    c.eta_cp = 0.8;
    CHECK(spin_wave_efficiency(c) == doctest::Approx(0.04).epsilon(1e-12));
}
