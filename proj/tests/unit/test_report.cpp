#include <cstdio>
#include <string>

#include "doctest.h"
#include "nvoptics/errors.hpp"
#include "nvoptics/io.hpp"
#include "nvoptics/report.hpp"

using namespace nvoptics;

TEST_CASE("report skeleton carries the audit fields") {
    Json doc = report_skeleton("absorb");
    CHECK(doc["schema_version"] == kReportSchemaVersion);
    CHECK(doc["tool"] == "absorb");
    CHECK(doc["inputs"].is_array());
    CHECK(doc["config"].is_object());
    CHECK(doc["results"].is_object());
}

TEST_CASE("inputs record path and content hash") {
    Json doc = report_skeleton("absorb");
    report_add_input(doc, "a.csv", "foobar");
    report_add_input(doc, "b.csv", "");
    REQUIRE(doc["inputs"].size() == 2);
    CHECK(doc["inputs"][0]["path"] == "a.csv");
    CHECK(doc["inputs"][0]["fnv1a64"] == "85944171f73967e8");
    CHECK(doc["inputs"][1]["fnv1a64"] == "cbf29ce484222325");
}

TEST_CASE("report write-read round trip preserves numbers to the bit") {
    const std::string path = "test_report_roundtrip.tmp";
    Json doc = report_skeleton("biref");
    doc["results"]["mean"] = 1.0 / 3.0;
    doc["results"]["tiny"] = 2.5e-17;
    write_report(doc, path);
    const Json back = read_report(path);
    CHECK(back["results"]["mean"].get<double>() == 1.0 / 3.0);
    CHECK(back["results"]["tiny"].get<double>() == 2.5e-17);
    CHECK(back == doc);
    std::remove(path.c_str());
}

TEST_CASE("report serialization is key-sorted and repeatable") {
    const std::string p1 = "test_report_a.tmp";
    const std::string p2 = "test_report_b.tmp";
    Json doc = report_skeleton("stages");
    doc["results"]["zeta"] = 1;
    doc["results"]["alpha"] = 2;
    write_report(doc, p1);

    Json doc2 = report_skeleton("stages");
    doc2["results"]["alpha"] = 2;  // inserted in the other order
    doc2["results"]["zeta"] = 1;
    write_report(doc2, p2);

    CHECK(read_text_file(p1) == read_text_file(p2));
    const std::string text = read_text_file(p1);
    CHECK(text.find("alpha") < text.find("zeta"));
    CHECK(text.back() == '\n');
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("unreadable or malformed reports raise the right errors") {
    CHECK_THROWS_AS(read_report("/nonexistent/r.json"), IoError);
    const std::string path = "test_report_bad.tmp";
    write_text_file(path, "{not json");
    CHECK_THROWS_AS(read_report(path), ValidationError);
    std::remove(path.c_str());
}
