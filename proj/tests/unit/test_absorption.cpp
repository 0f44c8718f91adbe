#include <cmath>
#include <vector>

#include "doctest.h"
#include "nvoptics/absorption.hpp"
#include "nvoptics/errors.hpp"
#include "oracles.hpp"

using namespace nvoptics;

TEST_CASE("reflectance model validates and predicts from the refractive index") {
    CHECK(ReflectanceModel{}.r_total == 0.2913);
    CHECK_THROWS_AS(ReflectanceModel(0.0), ValidationError);
    CHECK_THROWS_AS(ReflectanceModel(1.0), ValidationError);
    CHECK_THROWS_AS(ReflectanceModel(-0.1), ValidationError);

    // n = 2.4: R = (1.4/3.4)^2, total = 2R/(1+R)
    CHECK(fresnel_single_surface(2.4) == doctest::Approx(0.1695501730103806).epsilon(1e-14));
    CHECK(fresnel_total_reflectance(2.4) ==
          doctest::Approx(0.28994082840236685).epsilon(1e-14));
    CHECK(ReflectanceModel::from_index(2.4).r_total ==
          doctest::Approx(0.28994082840236685).epsilon(1e-14));
    CHECK_THROWS_AS(fresnel_single_surface(1.0), ValidationError);
    CHECK_THROWS_AS(fresnel_single_surface(0.9), ValidationError);
}

TEST_CASE("forward transmittance matches a bisection root of the quadratic") {
    const double cases[][3] = {
        {0.01, 0.02, 0.2913}, {0.5, 0.03, 0.2913},  {2.0, 0.03, 0.2913},
        {2.0, 0.03, 0.29},    {10.0, 0.05, 0.25},   {40.0, 0.14, 0.33},
        {0.001, 1.0, 0.2913}, {25.0, 0.025, 0.2913},
    };
    for (const auto& c : cases) {
        CAPTURE(c[0]);
        CAPTURE(c[1]);
        CAPTURE(c[2]);
        const double t = transmittance_forward(c[0], c[1], ReflectanceModel(c[2]));
        const double t_ref = oracles::transmittance_bisect(c[0], c[1], c[2]);
        CHECK(t == doctest::Approx(t_ref).epsilon(1e-12));
    }
    // frozen anchor so a silent formula change cannot hide behind the oracle
    CHECK(transmittance_forward(2.0, 0.03) ==
          doctest::Approx(0.5835298130482719).epsilon(1e-15));
}

TEST_CASE("integrating-sphere conversion inverts the forward model") {
    for (double a : {0.01, 0.1, 1.0, 5.0, 20.0, 45.0}) {
        for (double d_cm : {0.02, 0.03, 0.1}) {
            const double t = transmittance_forward(a, d_cm);
            const double back = absorption_coefficient_integrating(t, d_cm);
            CHECK(back == doctest::Approx(a).epsilon(1e-10));
        }
    }
}

TEST_CASE("zero absorption maps to the lossless ceiling exactly") {
    const ReflectanceModel model;
    const double ceiling = 1.0 - model.r_total;
    CHECK(transmittance_forward(0.0, 0.03, model) == ceiling);
    CHECK(absorption_coefficient_integrating(ceiling, 0.03, model) == 0.0);
}

TEST_CASE("superphysical transmittance clamps inside the band, throws beyond") {
    const ReflectanceModel model;
    const double ceiling = 1.0 - model.r_total;

    bool clamped = false;
    const double a =
        absorption_coefficient_integrating(ceiling + 0.5 * kSuperphysicalTol, 0.03, model,
                                           &clamped);
    CHECK(a == 0.0);
    CHECK(clamped);

    clamped = false;
    absorption_coefficient_integrating(ceiling - 1e-9, 0.03, model, &clamped);
    CHECK(!clamped);

    CHECK_THROWS_AS(
        absorption_coefficient_integrating(ceiling + 2.0 * kSuperphysicalTol, 0.03, model),
        ValidationError);
}

TEST_CASE("conversion rejects out-of-domain transmittance") {
    CHECK_THROWS_AS(absorption_coefficient_integrating(0.0, 0.03), ValidationError);
    CHECK_THROWS_AS(absorption_coefficient_integrating(-0.1, 0.03), ValidationError);
    CHECK_THROWS_AS(absorption_coefficient_integrating(1.5, 0.03), ValidationError);
    CHECK_THROWS_AS(absorption_coefficient_simple(0.0, 0.03), ValidationError);
    CHECK_THROWS_AS(absorption_coefficient_integrating(0.5, 0.0), ValidationError);
}

TEST_CASE("simple conversion is plain Beer-Lambert") {
    CHECK(absorption_coefficient_simple(0.5, 0.03) ==
          doctest::Approx(10.034333188799375).epsilon(1e-15));
    CHECK(absorption_coefficient_simple(1.0, 0.03) == 0.0);
    // always at least as large as the reflection-corrected value
    for (double t : {0.1, 0.3, 0.5, 0.7}) {
        CHECK(absorption_coefficient_simple(t, 0.03) >=
              absorption_coefficient_integrating(t, 0.03));
    }
}

TEST_CASE("spectrum conversion carries stats and geometry") {
    const SampleGeometry geom(300.0);
    const ReflectanceModel model;
    const double ceiling = 1.0 - model.r_total;
    Spectrum t(WavelengthGrid({400.0, 500.0, 600.0}),
               {0.5, ceiling + 0.5 * kSuperphysicalTol, 0.3}, SpectrumKind::Transmittance);

    ConversionStats stats;
    Spectrum a = spectrum_to_absorption(t, geom, ConversionMode::IntegratingSphere, model,
                                        &stats);
    CHECK(a.kind() == SpectrumKind::AbsorptionCoefficient);
    CHECK(a.size() == 3);
    CHECK(a.values()[1] == 0.0);
    CHECK(stats.clamped_count == 1);
    REQUIRE(stats.clamped_indices.size() == 1);
    CHECK(stats.clamped_indices[0] == 1);
    CHECK(a.values()[0] ==
          doctest::Approx(absorption_coefficient_integrating(0.5, 0.03)).epsilon(1e-15));

    Spectrum simple = spectrum_to_absorption(t, geom, ConversionMode::Simple);
    CHECK(simple.values()[0] ==
          doctest::Approx(absorption_coefficient_simple(0.5, 0.03)).epsilon(1e-15));

    Spectrum wrong_kind(WavelengthGrid({400.0, 500.0}), {1.0, 2.0},
                        SpectrumKind::AbsorptionCoefficient);
    CHECK_THROWS_AS(
        spectrum_to_absorption(wrong_kind, geom, ConversionMode::IntegratingSphere),
        ValidationError);
}

TEST_CASE("conversion errors name the offending wavelength") {
    const SampleGeometry geom(300.0);
    Spectrum t(WavelengthGrid({400.0, 512.0}), {0.5, 0.9999}, SpectrumKind::Transmittance);
    try {
        spectrum_to_absorption(t, geom, ConversionMode::IntegratingSphere);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("512") != std::string::npos);
    }
}

TEST_CASE("band integral agrees with a refined-quadrature oracle") {
    const std::vector<double> w{400.0, 450.0, 500.0, 600.0, 700.0, 800.0};
    const std::vector<double> v{1.0, 3.0, 2.0, 5.0, 4.0, 0.5};
    Spectrum s(WavelengthGrid(w), v, SpectrumKind::AbsorptionCoefficient);

    SUBCASE("interior band with edges between grid points") {
        const double got = band_integral(s, 430.0, 650.0);
        const double ref = oracles::trapezoid_refined(w, v, 430.0, 650.0);
        CHECK(got == doctest::Approx(ref).epsilon(1e-12));
    }
    SUBCASE("band edges exactly on grid points") {
        const double got = band_integral(s, 450.0, 700.0);
        const double ref = oracles::trapezoid_refined(w, v, 450.0, 700.0);
        CHECK(got == doctest::Approx(ref).epsilon(1e-12));
    }
    SUBCASE("band clipped to the grid") {
        CHECK(band_integral(s, 300.0, 900.0) ==
              doctest::Approx(band_integral(s, 400.0, 800.0)).epsilon(1e-15));
    }
    SUBCASE("average is the integral over the clipped width") {
        CHECK(band_average(s, 450.0, 700.0) ==
              doctest::Approx(band_integral(s, 450.0, 700.0) / 250.0).epsilon(1e-15));
        // clipping shrinks the divisor too
        CHECK(band_average(s, 300.0, 800.0) ==
              doctest::Approx(band_integral(s, 400.0, 800.0) / 400.0).epsilon(1e-15));
    }
}

TEST_CASE("constant spectrum band average is that constant") {
    Spectrum s(WavelengthGrid({500.0, 600.0, 700.0}), {2.5, 2.5, 2.5},
               SpectrumKind::AbsorptionCoefficient);
    CHECK(band_average(s, 520.0, 680.0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("bands without grid overlap are absent, not zero") {
    Spectrum s(WavelengthGrid({500.0, 600.0}), {1.0, 2.0},
               SpectrumKind::AbsorptionCoefficient);
    CHECK(!try_band_integral(s, 700.0, 800.0).has_value());
    CHECK(!try_band_average(s, 100.0, 200.0).has_value());
    CHECK(try_band_average(s, 550.0, 580.0).has_value());
    CHECK_THROWS_AS(band_integral(s, 700.0, 800.0), ValidationError);
    CHECK_THROWS_AS(band_average(s, 700.0, 800.0), ValidationError);
    CHECK_THROWS_AS(band_average(s, 600.0, 500.0), ValidationError);
}
