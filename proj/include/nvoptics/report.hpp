#pragma once

#include <string>

#include "json.hpp"

namespace nvoptics {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

// Every CLI run writes one of these: schema version, tool name, input
// provenance (path + content hash), the full effective configuration
// including defaults the user never touched, and the results. No timestamps,
// so identical invocations write identical bytes.
Json report_skeleton(const std::string& tool);

// Records path + FNV-1a hash of the content under inputs.
void report_add_input(Json& doc, const std::string& path, const std::string& content);

void write_report(const Json& doc, const std::string& path);
Json read_report(const std::string& path);

}  // namespace nvoptics
