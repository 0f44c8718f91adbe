#include <cmath>
#include <vector>

#include "doctest.h"
#include "nvoptics/absorption.hpp"
#include "nvoptics/errors.hpp"
#include "nvoptics/rng.hpp"
#include "nvoptics/synth.hpp"

using namespace nvoptics;

namespace {

WavelengthGrid small_grid() {
    std::vector<double> w;
    for (double x = 220.0; x <= 800.0; x += 10.0) w.push_back(x);
    return WavelengthGrid(std::move(w));
}

}  // namespace

TEST_CASE("zero-noise synthesis is the exact component combination") {
    const WavelengthGrid grid = small_grid();
    SynthSpec spec;
    spec.coefficients = {2.0, 1.0, 0.5, 0.3, 0.8};
    const Spectrum s = synth_absorption(spec, grid);
    const auto cols = component_columns(spec.model, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double expect = 0.0;
        for (std::size_t j = 0; j < cols.size(); ++j) {
            expect += spec.coefficients[j] * cols[j][i];
        }
        CHECK(s.values()[i] == expect);  // bitwise, same accumulation order
    }
}

TEST_CASE("bumps add unit-peak gaussians times amplitude") {
    WavelengthGrid grid({550.0, 650.0, 750.0});
    SynthSpec spec;
    spec.model.gaussians.clear();  // only ramp and offset remain
    spec.coefficients = {0.0, 0.0};
    spec.extra_features.push_back({650.0, 120.0, 2.0});
    const Spectrum s = synth_absorption(spec, grid);
    CHECK(s.values()[1] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.values()[0] == s.values()[2]);  // symmetric flanks
    CHECK(s.values()[0] < 2.0);
}

TEST_CASE("multiplicative noise is seeded and reproducible") {
    const WavelengthGrid grid = small_grid();
    SynthSpec spec;
    spec.coefficients = {2.0, 1.0, 0.5, 0.3, 0.8};
    spec.noise.multiplicative_sigma = 0.02;
    spec.noise.seed = 99;
    const Spectrum a = synth_absorption(spec, grid);
    const Spectrum b = synth_absorption(spec, grid);
    CHECK(a.values() == b.values());

    spec.noise.seed = 100;
    const Spectrum c = synth_absorption(spec, grid);
    CHECK(a.values() != c.values());

    // noise matches a hand-rolled application of the same stream
    SynthSpec clean = spec;
    clean.noise.multiplicative_sigma = 0.0;
    const Spectrum base = synth_absorption(clean, grid);
    SplitMix64 rng(100);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double expect = std::max(0.0, base.values()[i] * (1.0 + 0.02 * rng.normal()));
        CHECK(c.values()[i] == expect);
    }
}

TEST_CASE("noise never produces negative absorption") {
    const WavelengthGrid grid = small_grid();
    SynthSpec spec;
    spec.coefficients = {0.0, 0.0, 0.0, 0.0, 1e-6};  // tiny baseline, noise dominates
    spec.noise.multiplicative_sigma = 50.0;
    spec.noise.seed = 5;
    const Spectrum s = synth_absorption(spec, grid);
    for (double v : s.values()) CHECK(v >= 0.0);
}

TEST_CASE("synthetic transmittance is the pointwise forward model") {
    const WavelengthGrid grid = small_grid();
    SynthSpec spec;
    spec.coefficients = {2.0, 1.0, 0.5, 0.3, 0.8};
    const Spectrum a = synth_absorption(spec, grid);
    const Spectrum t = synth_transmittance(spec, grid);
    CHECK(t.kind() == SpectrumKind::Transmittance);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(t.values()[i] ==
              transmittance_forward(a.values()[i], spec.geometry.thickness_cm(),
                                    spec.reflectance));
    }
}

TEST_CASE("synth spec validation") {
    SynthSpec spec;
    spec.coefficients = {1.0, 1.0};  // five components expected
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.coefficients = {1.0, 1.0, 1.0, 1.0, -0.1};
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.coefficients = {1.0, 1.0, 1.0, 1.0, 1.0};
    CHECK_NOTHROW(spec.validate());
    spec.noise.multiplicative_sigma = -0.5;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.noise.multiplicative_sigma = 0.0;
    spec.extra_features.push_back({650.0, 0.0, 1.0});
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("noise-free map synthesis lays down baseline plus blobs") {
    MapSynthSpec spec;
    spec.width = 9;
    spec.height = 7;
    spec.baseline_delta_n = 1e-5;
    spec.thickness_um = 300.0;
    spec.blobs.push_back({4.0, 3.0, 1.0, 5e-5});
    const RetardationMap m = synth_retardation_map(spec);
    REQUIRE(m.width() == 9);
    REQUIRE(m.height() == 7);
    // center pixel: (baseline + amplitude) * 3e5 nm
    const double center = m.values()[3 * 9 + 4];
    CHECK(center == doctest::Approx(6e-5 * 3e5).epsilon(1e-12));
    // the blob at sigma 1 px has died off 5 pixels out
    const double corner = m.values()[0];
    CHECK(corner == doctest::Approx(1e-5 * 3e5).epsilon(1e-4));
    CHECK(m.valid_count() == 63);  // rectangle mask keeps everything
}

TEST_CASE("ellipse mask invalidates corners but keeps the center") {
    MapSynthSpec spec;
    spec.width = 21;
    spec.height = 15;
    const RetardationMap m = synth_retardation_map(spec);
    CHECK(m.mask()[0] == 1);  // rectangle keeps the corners
    CHECK(m.valid_count() == spec.width * spec.height);

    spec.mask_shape = MaskShape::Ellipse;
    const RetardationMap e = synth_retardation_map(spec);
    CHECK(e.mask()[0] == 0);
    CHECK(e.mask()[7 * 21 + 10] == 1);  // center pixel valid
    CHECK(e.valid_count() < m.valid_count());
}

TEST_CASE("mask shape does not shift the noise stream") {
    MapSynthSpec spec;
    spec.width = 12;
    spec.height = 12;
    spec.noise_sigma_nm = 0.4;
    spec.seed = 31;
    const RetardationMap rect = synth_retardation_map(spec);
    spec.mask_shape = MaskShape::Ellipse;
    const RetardationMap ell = synth_retardation_map(spec);
    // every pixel valid under both masks carries the identical value
    for (std::size_t i = 0; i < rect.values().size(); ++i) {
        if (rect.mask()[i] && ell.mask()[i]) {
            CHECK(rect.values()[i] == ell.values()[i]);
        }
    }
}

TEST_CASE("negative-going noise clamps at zero and is counted") {
    MapSynthSpec spec;
    spec.width = 40;
    spec.height = 40;
    spec.baseline_delta_n = 0.0;     // retardation 0, so noise is half negative
    spec.noise_sigma_nm = 1.0;
    spec.seed = 3;
    std::size_t clamped = 0;
    const RetardationMap m = synth_retardation_map(spec, &clamped);
    CHECK(clamped > 500);  // about half of 1600
    CHECK(clamped < 1100);
    for (std::size_t i = 0; i < m.values().size(); ++i) {
        if (m.mask()[i]) CHECK(m.values()[i] >= 0.0);
    }
}

TEST_CASE("negative blob amplitudes carve dips, never below zero retardation") {
    MapSynthSpec spec;
    spec.width = 11;
    spec.height = 11;
    spec.baseline_delta_n = 1e-5;
    spec.blobs.push_back({5.0, 5.0, 1.0, -2e-5});  // deeper than the baseline
    std::size_t clamped = 0;
    const RetardationMap m = synth_retardation_map(spec, &clamped);
    CHECK(m.values()[5 * 11 + 5] == 0.0);
    CHECK(clamped > 0);
}

TEST_CASE("map spec validation") {
    MapSynthSpec spec;
    spec.width = 0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.width = 64;
    spec.pixel_pitch_um = -1.0;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.pixel_pitch_um = 50.0;
    spec.baseline_delta_n = -1e-6;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
    spec.baseline_delta_n = 1e-5;
    spec.blobs.push_back({0.0, 0.0, 0.0, 1e-5});
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}
