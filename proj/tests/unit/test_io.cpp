#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "nvoptics/errors.hpp"
#include "nvoptics/io.hpp"
#include "nvoptics/synth.hpp"

using namespace nvoptics;

TEST_CASE("format_double round-trips through parse exactly") {
    for (double v : {0.1, 1.0 / 3.0, 2.5e-17, 123456.789, 0.0, -42.00000001}) {
        const std::string s = format_double(v);
        const auto back = parse_strict_double(s);
        REQUIRE(back.has_value());
        CHECK(*back == v);
    }
}

TEST_CASE("strict double parsing rejects partial and malformed tokens") {
    CHECK(*parse_strict_double("3.25") == 3.25);
    CHECK(*parse_strict_double("-1e-5") == -1e-5);
    CHECK(!parse_strict_double("").has_value());
    CHECK(!parse_strict_double("3.25x").has_value());
    CHECK(!parse_strict_double("1,5").has_value());
    CHECK(!parse_strict_double("0x10").has_value());

    CHECK(*parse_strict_u64("42") == 42);
    CHECK(*parse_strict_u64("0") == 0);
    CHECK(!parse_strict_u64("-1").has_value());
    CHECK(!parse_strict_u64("4.5").has_value());
    CHECK(!parse_strict_u64("").has_value());
}

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("transmittance spectrum parsing") {
    const std::string text =
        "# kind: transmittance\n"
        "# thickness_um: 300\n"
        "220,0.55\n"
        "240,0.60\n";
    const auto p = parse_spectrum_text(text, "mem");
    CHECK(p.spectrum.kind() == SpectrumKind::Transmittance);
    CHECK(p.spectrum.size() == 2);
    CHECK(p.spectrum.values()[1] == 0.60);
    REQUIRE(p.geometry.has_value());
    CHECK(p.geometry->thickness_um == 300.0);
}

TEST_CASE("percent transmittance is normalized exactly once") {
    const std::string text =
        "# kind: transmittance_percent\n"
        "# thickness_um: 300\n"
        "220,55\n"
        "240,70.87\n";
    const auto p = parse_spectrum_text(text, "mem");
    CHECK(p.spectrum.values()[0] == doctest::Approx(0.55).epsilon(1e-15));
    CHECK(p.spectrum.values()[1] == doctest::Approx(0.7087).epsilon(1e-15));
}

TEST_CASE("absorption kind does not require thickness") {
    const std::string text =
        "# kind: absorption_cm-1\n"
        "220,1.5\n"
        "240,2.5\n";
    const auto p = parse_spectrum_text(text, "mem");
    CHECK(p.spectrum.kind() == SpectrumKind::AbsorptionCoefficient);
    CHECK(!p.geometry.has_value());
}

TEST_CASE("spectrum parse errors carry the origin and line number") {
    auto expect_fail = [](const std::string& text, const std::string& needle) {
        try {
            parse_spectrum_text(text, "f.csv");
            FAIL_CHECK("expected ValidationError for: " << needle);
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CAPTURE(msg);
            CHECK(msg.find("f.csv") != std::string::npos);
            CHECK(msg.find(needle) != std::string::npos);
        }
    };
    const std::string head = "# kind: transmittance\n# thickness_um: 300\n";
    expect_fail(head + "220,0.5\n220,0.5\n", "duplicate");
    expect_fail(head + "240,0.5\n220,0.5\n", "sorted");
    expect_fail(head + "220,0.5\n230,abc\n", ":4");
    expect_fail(head + "220,0.5\n230,0.5,9\n", "fields");
    expect_fail(head + "-220,0.5\n230,0.5\n", "positive");
    expect_fail(head + "220,1.5\n230,0.5\n", "(0,1]");
    expect_fail(head + "220,0\n230,0.5\n", "(0,1]");
    expect_fail("# kind: scattering\n220,0.5\n", "unknown kind");
    expect_fail("# flavor: odd\n# kind: transmittance\n# thickness_um: 300\n220,0.5\n230,0.6\n",
                "unknown directive");
    expect_fail(head + "220,0.5\n# kind: transmittance\n230,0.6\n", "directive after data");
    expect_fail("220,0.5\n230,0.6\n", "kind");
    expect_fail("# kind: transmittance\n220,0.5\n230,0.6\n", "thickness_um");
    expect_fail(head + "220,0.5\n", "at least 2");
    // percent values above 100 are rejected, not scaled
    expect_fail("# kind: transmittance_percent\n# thickness_um: 300\n220,150\n230,50\n",
                "(0,100]");
}

TEST_CASE("spectrum emit-parse is the identity") {
    std::vector<double> w;
    for (double x = 220.0; x <= 800.0; x += 7.3) w.push_back(x);
    SynthSpec spec;
    spec.coefficients = {2.0, 1.0, 0.5, 0.3, 0.8};
    spec.noise.multiplicative_sigma = 0.03;
    spec.noise.seed = 17;
    const WavelengthGrid grid(std::move(w));

    SUBCASE("absorption with geometry") {
        const Spectrum s = synth_absorption(spec, grid);
        const std::string text = spectrum_to_text(s, SampleGeometry(300.0));
        const auto back = parse_spectrum_text(text, "mem");
        CHECK(back.spectrum == s);
        CHECK(back.geometry->thickness_um == 300.0);
    }
    SUBCASE("transmittance") {
        const Spectrum s = synth_transmittance(spec, grid);
        const std::string text = spectrum_to_text(s, SampleGeometry(300.0));
        const auto back = parse_spectrum_text(text, "mem");
        CHECK(back.spectrum == s);
    }
    SUBCASE("absorption without geometry") {
        const Spectrum s = synth_absorption(spec, grid);
        const std::string text = spectrum_to_text(s, std::nullopt);
        const auto back = parse_spectrum_text(text, "mem");
        CHECK(back.spectrum == s);
        CHECK(!back.geometry.has_value());
    }
}

TEST_CASE("map parsing and emission") {
    const std::string text =
        "# retardation_map\n"
        "# width: 3\n"
        "# height: 2\n"
        "# pixel_pitch_um: 50\n"
        "# unit: nm\n"
        "1.5,2.5,nan\n"
        "0,4.25,5\n";
    const RetardationMap m = parse_map_text(text, "mem");
    CHECK(m.width() == 3);
    CHECK(m.height() == 2);
    CHECK(m.pixel_pitch_um() == 50.0);
    CHECK(m.valid_count() == 5);
    CHECK(m.mask()[2] == 0);
    CHECK(m.values()[4] == 4.25);
    CHECK(m.values()[3] == 0.0);  // zero is a legitimate value, not a sentinel

    const std::string emitted = map_to_text(m);
    const RetardationMap back = parse_map_text(emitted, "mem2");
    CHECK(back.values() == m.values());
    CHECK(back.mask() == m.mask());
    CHECK(back.width() == m.width());

    // NaN spelling is case-insensitive on input
    const RetardationMap upper = parse_map_text(
        "# retardation_map\n# width: 2\n# height: 1\n# pixel_pitch_um: 50\n# unit: nm\n"
        "NaN,3\n",
        "mem3");
    CHECK(upper.mask()[0] == 0);
}

TEST_CASE("map parse errors") {
    auto expect_fail = [](const std::string& text, const std::string& needle) {
        try {
            parse_map_text(text, "m.txt");
            FAIL_CHECK("expected ValidationError for: " << needle);
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CAPTURE(msg);
            CHECK(msg.find(needle) != std::string::npos);
        }
    };
    const std::string head =
        "# retardation_map\n# width: 2\n# height: 2\n# pixel_pitch_um: 50\n# unit: nm\n";
    expect_fail("# width: 2\n# height: 1\n# pixel_pitch_um: 50\n# unit: nm\n1,2\n",
                "retardation_map");
    expect_fail(head + "1,2\n3\n", "width is 2");
    expect_fail(head + "1,2\n3,4\n5,6\n", "rows");
    expect_fail(head + "1,2\n", "rows");
    expect_fail(head + "1,-2\n3,4\n", "negative");
    expect_fail(head + "1,x\n3,4\n", "not a number");
    expect_fail(
        "# retardation_map\n# width: 2\n# height: 2\n# pixel_pitch_um: 50\n# unit: km\n1,2\n3,4\n",
        "unit");
}

TEST_CASE("correlation csv parsing") {
    const std::string text =
        "# comment\n"
        "sample_id,p1_ppm,metric,metric_err\n"
        "s1,0.5,0.125,0.01\n"
        "s2,1.0,0.5,\n"
        "s3,2.0,2.0\n";
    const auto pts = parse_correlation_text(text, "mem");
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].sample_id == "s1");
    CHECK(pts[0].p1_ppm == 0.5);
    CHECK(*pts[0].y_err == 0.01);
    CHECK(!pts[1].y_err.has_value());  // trailing empty field
    CHECK(!pts[2].y_err.has_value());  // three-field row

    // header row only allowed as the first content line
    CHECK_THROWS_AS(
        parse_correlation_text("s1,1,1\nsample_id,p1_ppm,metric\n", "mem"), ValidationError);
    CHECK_THROWS_AS(parse_correlation_text("s1,0,1\n", "mem"), ValidationError);
    CHECK_THROWS_AS(parse_correlation_text("s1,1,-2\n", "mem"), ValidationError);
    CHECK_THROWS_AS(parse_correlation_text("s1,1,1,0\n", "mem"), ValidationError);
    CHECK_THROWS_AS(parse_correlation_text(",1,1\n", "mem"), ValidationError);
}

TEST_CASE("config files are flat key-value text") {
    const std::string text =
        "# model tweaks\n"
        "gaussians = 270:40;360:100\n"
        "  window=220:700 \n"
        "\n"
        "ramp_exponent = 2.5\n"
        "ramp_exponent = 3.5\n";  // later key wins
    const auto cfg = parse_config_text(text, "mem");
    CHECK(cfg.at("gaussians") == "270:40;360:100");
    CHECK(cfg.at("window") == "220:700");
    CHECK(cfg.at("ramp_exponent") == "3.5");
    CHECK_THROWS_AS(parse_config_text("novalue\n", "mem"), ValidationError);
    CHECK_THROWS_AS(parse_config_text("= 3\n", "mem"), ValidationError);
}

TEST_CASE("file io reports missing paths as io errors") {
    CHECK_THROWS_AS(read_text_file("/nonexistent/nowhere.txt"), IoError);
    CHECK_THROWS_AS(write_text_file("/nonexistent/dir/out.txt", "x"), IoError);
    CHECK_THROWS_AS(parse_spectrum("/nonexistent/nowhere.csv"), IoError);
}

TEST_CASE("write then read round-trips bytes") {
    const std::string path = "test_io_roundtrip.tmp";
    const std::string payload = "line1\nline2\n";
    write_text_file(path, payload);
    CHECK(read_text_file(path) == payload);
    std::remove(path.c_str());
}
