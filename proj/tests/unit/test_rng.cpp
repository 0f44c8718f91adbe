#include <cmath>
#include <cstdint>

#include "doctest.h"
#include "nvoptics/rng.hpp"

using namespace nvoptics;

// Reference outputs computed with an independent implementation of the
// published splitmix64 update. Any drift in constants or shift amounts
// breaks every seeded dataset downstream, so these are pinned hard.

TEST_CASE("raw 64-bit stream matches the reference for seed 42") {
    SplitMix64 rng(42);
    CHECK(rng.next_u64() == UINT64_C(13679457532755275413));
    CHECK(rng.next_u64() == UINT64_C(2949826092126892291));
    CHECK(rng.next_u64() == UINT64_C(5139283748462763858));
    CHECK(rng.next_u64() == UINT64_C(6349198060258255764));
}

TEST_CASE("raw 64-bit stream matches the reference for seed 0") {
    SplitMix64 rng(0);
    CHECK(rng.next_u64() == UINT64_C(16294208416658607535));
    CHECK(rng.next_u64() == UINT64_C(7960286522194355700));
    CHECK(rng.next_u64() == UINT64_C(487617019471545679));
}

TEST_CASE("uniform doubles use the top 53 bits") {
    SplitMix64 rng(42);
    CHECK(rng.uniform() == doctest::Approx(0.7415648787718233).epsilon(1e-16));
    CHECK(rng.uniform() == doctest::Approx(0.1599103928769201).epsilon(1e-16));
    CHECK(rng.uniform() == doctest::Approx(0.27860113025513866).epsilon(1e-16));
    CHECK(rng.uniform() == doctest::Approx(0.34419071652363753).epsilon(1e-16));
}

TEST_CASE("normal deviates match the reference Box-Muller sequence") {
    SplitMix64 rng(42);
    CHECK(rng.normal() == doctest::Approx(0.8822489062222688).epsilon(1e-13));
    CHECK(rng.normal() == doctest::Approx(-0.4508498757188601).epsilon(1e-13));
    CHECK(rng.normal() == doctest::Approx(0.1883526341159315).epsilon(1e-13));
}

TEST_CASE("uniform output stays inside [0, 1)") {
    SplitMix64 rng(123456789);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("same seed, same stream; different seed, different stream") {
    SplitMix64 a(7), b(7), c(8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("normal deviates have roughly standard moments") {
    SplitMix64 rng(2024);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}
