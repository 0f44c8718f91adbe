#include <cmath>
#include <vector>

#include "doctest.h"
#include "nvoptics/birefringence.hpp"
#include "nvoptics/errors.hpp"
#include "oracles.hpp"

using namespace nvoptics;

TEST_CASE("retardation map construction enforces the grid contract") {
    CHECK_NOTHROW(RetardationMap(2, 2, 50.0, {1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}));
    CHECK_THROWS_AS(RetardationMap(0, 2, 50.0, {}, {}), ValidationError);
    CHECK_THROWS_AS(RetardationMap(2, 2, 0.0, {1.0, 2.0, 3.0, 4.0}, {1, 1, 1, 1}),
                    ValidationError);
    CHECK_THROWS_AS(RetardationMap(2, 2, 50.0, {1.0, 2.0, 3.0}, {1, 1, 1, 1}),
                    ValidationError);
    // negative or non-finite valid pixels are rejected
    CHECK_THROWS_AS(RetardationMap(2, 2, 50.0, {1.0, -2.0, 3.0, 4.0}, {1, 1, 1, 1}),
                    ValidationError);
    CHECK_THROWS_AS(RetardationMap(2, 2, 50.0, {1.0, std::nan(""), 3.0, 4.0}, {1, 1, 1, 1}),
                    ValidationError);
    // the same values are fine when the pixel is masked out
    CHECK_NOTHROW(RetardationMap(2, 2, 50.0, {1.0, std::nan(""), 3.0, 4.0}, {1, 0, 1, 1}));
    // at least one valid pixel
    CHECK_THROWS_AS(RetardationMap(2, 2, 50.0, {1.0, 2.0, 3.0, 4.0}, {0, 0, 0, 0}),
                    ValidationError);
    RetardationMap m(2, 2, 50.0, {1.0, 2.0, 3.0, 4.0}, {1, 0, 1, 1});
    CHECK(m.valid_count() == 3);
}

TEST_CASE("delta-n is retardation over thickness, both in nm") {
    // 300 um = 3e5 nm; Gamma = 3 nm -> delta-n = 1e-5
    RetardationMap m(2, 1, 50.0, {3.0, 30.0}, {1, 1});
    SampleGeometry geom(300.0);
    DeltaNMap dn = delta_n_map(m, geom);
    CHECK(dn.values()[0] == doctest::Approx(1e-5).epsilon(1e-12));
    CHECK(dn.values()[1] == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(dn.width() == 2);
    CHECK(dn.pixel_pitch_um() == 50.0);
}

TEST_CASE("map statistics match a two-pass oracle") {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    std::vector<double> valid;
    for (std::size_t i = 0; i < 101; ++i) {
        const double v = 1e-6 * static_cast<double>((i * 37) % 101);
        values.push_back(v);
        mask.push_back(i % 7 == 0 ? 0 : 1);
        if (i % 7 != 0) valid.push_back(v);
    }
    DeltaNMap m(101, 1, 50.0, values, mask);
    const MapStats got = map_stats(m);
    const auto ref = oracles::two_pass_stats(valid);
    CHECK(got.mean == doctest::Approx(ref.mean).epsilon(1e-13));
    CHECK(got.std_dev == doctest::Approx(ref.std_dev).epsilon(1e-12));
    CHECK(got.min == ref.min);
    CHECK(got.max == ref.max);
    CHECK(got.valid_fraction ==
          doctest::Approx(static_cast<double>(valid.size()) / 101.0).epsilon(1e-15));
}

TEST_CASE("single-pixel statistics are degenerate but defined") {
    DeltaNMap m(2, 1, 50.0, {5e-6, 0.0}, {1, 0});
    const MapStats s = map_stats(m);
    CHECK(s.mean == 5e-6);
    CHECK(s.std_dev == 0.0);
    CHECK(s.min == 5e-6);
    CHECK(s.max == 5e-6);
    CHECK(s.valid_fraction == 0.5);
}

TEST_CASE("ultra-low classification is strict at the threshold") {
    MapStats s;
    s.mean = 9.999e-6;
    CHECK(classify_ultra_low(s));
    s.mean = 1e-5;
    CHECK(!classify_ultra_low(s));  // strictly below, so equal fails
    s.mean = 1.1e-5;
    CHECK(!classify_ultra_low(s));
}

TEST_CASE("worst-case loss reproduces the published working points") {
    // delta-n 1e-4 through 300 um at 700 nm: about 1.8 percent
    CHECK(worst_case_loss(1e-4, 0.03, 700.0) ==
          doctest::Approx(0.018018569652073352).epsilon(1e-14));
    // delta-n 1e-5: about 0.018 percent
    CHECK(worst_case_loss(1e-5, 0.03, 700.0) ==
          doctest::Approx(1.8126749448944086e-4).epsilon(1e-14));
    CHECK(worst_case_loss(0.0, 0.03, 700.0) == 0.0);
    // sin^2 never leaves [0, 1] even for huge retardance
    CHECK(worst_case_loss(0.1, 1.0, 700.0) <= 1.0);
    CHECK(worst_case_loss(0.1, 1.0, 700.0) >= 0.0);
    CHECK_THROWS_AS(worst_case_loss(1e-5, 0.03, 0.0), ValidationError);
    CHECK_THROWS_AS(worst_case_loss(-1e-5, 0.03, 700.0), ValidationError);
}

TEST_CASE("loss map carries the mask and zeros invalid pixels") {
    RetardationMap m(2, 1, 50.0, {30.0, 999.0}, {1, 0});
    SampleGeometry geom(300.0);
    DeltaNMap dn = delta_n_map(m, geom);
    LossMap loss = loss_map(dn, geom, 700.0);
    CHECK(loss.values[0] == doctest::Approx(worst_case_loss(1e-4, 0.03, 700.0)).epsilon(1e-13));
    CHECK(loss.values[1] == 0.0);
    CHECK(loss.mask[0] == 1);
    CHECK(loss.mask[1] == 0);
}

TEST_CASE("loss grows with thickness for small retardance") {
    const double thin = worst_case_loss(1e-5, 0.02, 700.0);
    const double thick = worst_case_loss(1e-5, 0.10, 700.0);
    CHECK(thick > thin);
}
