#include "nvoptics/report.hpp"

#include "nvoptics/errors.hpp"
#include "nvoptics/io.hpp"

namespace nvoptics {

Json report_skeleton(const std::string& tool) {
    Json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["tool"] = tool;
    doc["inputs"] = Json::array();
    doc["config"] = Json::object();
    doc["results"] = Json::object();
    return doc;
}

void report_add_input(Json& doc, const std::string& path, const std::string& content) {
    Json entry;
    entry["path"] = path;
    entry["fnv1a64"] = fnv1a64_hex(content);
    doc["inputs"].push_back(entry);
}

void write_report(const Json& doc, const std::string& path) {
    write_text_file(path, doc.dump(2) + "\n");
}

Json read_report(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

}  // namespace nvoptics
