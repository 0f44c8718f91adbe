#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nvoptics/analysis.hpp"
#include "nvoptics/birefringence.hpp"
#include "nvoptics/types.hpp"

namespace nvoptics {

// Shortest decimal form that parses back to the same bits; every file this
// toolkit emits goes through it, which is what makes emit/parse round trips
// and byte-identical reruns possible.
std::string format_double(double v);

// FNV-1a 64-bit content hash as 16 hex digits, for input provenance lines in
// reports.
std::string fnv1a64_hex(std::string_view data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct ParsedSpectrum {
    Spectrum spectrum;
    std::optional<SampleGeometry> geometry;
};

// Spectrum CSV: leading '# key: value' directives, then wavelength_nm,value
// rows. 'kind' is required (transmittance, transmittance_percent, or
// absorption_cm-1); 'thickness_um' is required for the transmittance kinds.
// Percent values are normalized to fractions while parsing. Rows must be
// strictly ascending; out-of-order or duplicate wavelengths are errors, not
// things to fix up silently.
ParsedSpectrum parse_spectrum_text(const std::string& text, const std::string& origin);
ParsedSpectrum parse_spectrum(const std::string& path);
std::string spectrum_to_text(const Spectrum& s, const std::optional<SampleGeometry>& geom);
void write_spectrum(const Spectrum& s, const std::optional<SampleGeometry>& geom,
                    const std::string& path);

// Retardation map file: '# retardation_map' tag line, width/height/
// pixel_pitch_um/unit directives, then height rows of width comma-separated
// values. 'nan' in any case marks a pixel outside the sample.
RetardationMap parse_map_text(const std::string& text, const std::string& origin);
RetardationMap parse_map(const std::string& path);
std::string map_to_text(const RetardationMap& m);
void write_map(const RetardationMap& m, const std::string& path);

// Correlation CSV rows: sample_id,p1_ppm,metric[,metric_err]. '#' lines are
// comments; the error field may be empty or missing.
std::vector<CorrelationPoint> parse_correlation_text(const std::string& text,
                                                     const std::string& origin);
std::vector<CorrelationPoint> parse_correlation_csv(const std::string& path);

// Flat 'key = value' configuration with '#' comments; a repeated key takes
// its last value.
std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin);
std::map<std::string, std::string> parse_config(const std::string& path);

// Strict scalar parsing for config interpreters: surrounding whitespace is
// tolerated, anything else unconsumed is a failure.
std::optional<double> parse_strict_double(std::string_view token);
std::optional<std::uint64_t> parse_strict_u64(std::string_view token);

}  // namespace nvoptics
