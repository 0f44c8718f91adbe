#include "nvoptics/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nvoptics/errors.hpp"

namespace nvoptics {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    static const char* digits = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = digits[h & 0xF];
        h >>= 4;
    }
    return std::string(buf, 16);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failed on '" + path + "'");
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << content;
    out.flush();
    if (!out) {
        throw IoError("write failed on '" + path + "'");
    }
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_no,
                             const std::string& msg) {
    std::ostringstream os;
    os << origin << ':' << line_no << ": " << msg;
    throw ValidationError(os.str());
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_double_strict(std::string_view tok, double& out) {
    tok = trim(tok);
    if (tok.empty()) return false;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

std::vector<std::string_view> split(std::string_view s, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> split_lines(const std::string& text) {
    return split(text, '\n');
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const char ca = a[i] >= 'A' && a[i] <= 'Z' ? static_cast<char>(a[i] + 32) : a[i];
        const char cb = b[i] >= 'A' && b[i] <= 'Z' ? static_cast<char>(b[i] + 32) : b[i];
        if (ca != cb) return false;
    }
    return true;
}

// '# key: value' -> {key, value}; returns false if the line is not shaped
// like a directive at all.
bool parse_directive(std::string_view line, std::string_view& key, std::string_view& value) {
    line = trim(line);
    if (line.empty() || line.front() != '#') return false;
    line.remove_prefix(1);
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) {
        key = trim(line);  // bare tag such as '# retardation_map'
        value = {};
        return true;
    }
    key = trim(line.substr(0, colon));
    value = trim(line.substr(colon + 1));
    return true;
}

}  // namespace

ParsedSpectrum parse_spectrum_text(const std::string& text, const std::string& origin) {
    std::optional<SpectrumKind> kind;
    bool percent = false;
    std::optional<double> thickness_um;
    std::vector<double> wavelengths, values;
    bool in_data = false;

    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (in_data) {
                parse_fail(origin, line_no, "directive after data rows");
            }
            std::string_view key, value;
            parse_directive(line, key, value);
            if (key == "kind") {
                if (value == "transmittance") {
                    kind = SpectrumKind::Transmittance;
                } else if (value == "transmittance_percent") {
                    kind = SpectrumKind::Transmittance;
                    percent = true;
                } else if (value == "absorption_cm-1") {
                    kind = SpectrumKind::AbsorptionCoefficient;
                } else {
                    parse_fail(origin, line_no,
                               "unknown kind '" + std::string(value) +
                                   "' (expected transmittance, transmittance_percent, or "
                                   "absorption_cm-1)");
                }
            } else if (key == "thickness_um") {
                double d;
                if (!parse_double_strict(value, d) || !std::isfinite(d)) {
                    parse_fail(origin, line_no, "thickness_um is not a number");
                }
                thickness_um = d;
            } else {
                parse_fail(origin, line_no, "unknown directive '" + std::string(key) + "'");
            }
            continue;
        }
        in_data = true;
        const auto fields = split(line, ',');
        if (fields.size() != 2) {
            std::ostringstream os;
            os << "expected 'wavelength_nm,value', got " << fields.size() << " fields";
            parse_fail(origin, line_no, os.str());
        }
        double w, v;
        if (!parse_double_strict(fields[0], w) || !std::isfinite(w)) {
            parse_fail(origin, line_no, "wavelength is not a number");
        }
        if (!parse_double_strict(fields[1], v) || !std::isfinite(v)) {
            parse_fail(origin, line_no, "value is not a number");
        }
        if (!(w > 0.0)) {
            parse_fail(origin, line_no, "wavelength must be positive");
        }
        if (!wavelengths.empty()) {
            if (w == wavelengths.back()) {
                parse_fail(origin, line_no, "duplicate wavelength");
            }
            if (w < wavelengths.back()) {
                parse_fail(origin, line_no, "wavelengths must be sorted ascending");
            }
        }
        if (!kind) {
            parse_fail(origin, line_no, "data before the required '# kind:' directive");
        }
        if (percent) {
            if (!(v > 0.0 && v <= 100.0)) {
                parse_fail(origin, line_no, "percent transmittance must lie in (0,100]");
            }
            v /= 100.0;
        } else if (*kind == SpectrumKind::Transmittance) {
            if (!(v > 0.0 && v <= 1.0)) {
                parse_fail(origin, line_no, "transmittance must lie in (0,1]");
            }
        } else if (v < 0.0) {
            parse_fail(origin, line_no, "absorption coefficient must be non-negative");
        }
        wavelengths.push_back(w);
        values.push_back(v);
    }

    if (!kind) {
        throw ValidationError(origin + ": missing required '# kind:' directive");
    }
    if (*kind == SpectrumKind::Transmittance && !thickness_um) {
        throw ValidationError(origin +
                              ": transmittance files need a '# thickness_um:' directive");
    }
    if (wavelengths.size() < 2) {
        throw ValidationError(origin + ": need at least 2 data rows");
    }
    std::optional<SampleGeometry> geom;
    if (thickness_um) {
        try {
            geom = SampleGeometry(*thickness_um);
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ": " + e.what());
        }
    }
    return ParsedSpectrum{
        Spectrum(WavelengthGrid(std::move(wavelengths)), std::move(values), *kind,
                 SpectrumRole::Measured),
        geom};
}

ParsedSpectrum parse_spectrum(const std::string& path) {
    return parse_spectrum_text(read_text_file(path), path);
}

std::string spectrum_to_text(const Spectrum& s, const std::optional<SampleGeometry>& geom) {
    std::ostringstream os;
    os << "# kind: " << to_string(s.kind()) << '\n';
    if (geom) {
        os << "# thickness_um: " << format_double(geom->thickness_um) << '\n';
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << format_double(s.grid()[i]) << ',' << format_double(s.values()[i]) << '\n';
    }
    return os.str();
}

void write_spectrum(const Spectrum& s, const std::optional<SampleGeometry>& geom,
                    const std::string& path) {
    write_text_file(path, spectrum_to_text(s, geom));
}

RetardationMap parse_map_text(const std::string& text, const std::string& origin) {
    bool tagged = false;
    std::optional<std::size_t> width, height;
    std::optional<double> pitch;
    bool unit_seen = false;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
    std::size_t rows = 0;
    bool in_data = false;

    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const std::string_view line = trim(lines[li]);
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (in_data) {
                parse_fail(origin, line_no, "directive after data rows");
            }
            std::string_view key, value;
            parse_directive(line, key, value);
            if (key == "retardation_map" && value.empty()) {
                tagged = true;
            } else if (key == "width" || key == "height") {
                double d;
                if (!parse_double_strict(value, d) || !(d > 0.0) || d != std::floor(d) ||
                    d > 1e7) {
                    parse_fail(origin, line_no,
                               std::string(key) + " must be a positive integer");
                }
                (key == "width" ? width : height) = static_cast<std::size_t>(d);
            } else if (key == "pixel_pitch_um") {
                double d;
                if (!parse_double_strict(value, d) || !(d > 0.0)) {
                    parse_fail(origin, line_no, "pixel_pitch_um must be positive");
                }
                pitch = d;
            } else if (key == "unit") {
                if (value != "nm") {
                    parse_fail(origin, line_no, "unit must be nm");
                }
                unit_seen = true;
            } else {
                parse_fail(origin, line_no, "unknown directive '" + std::string(key) + "'");
            }
            continue;
        }
        if (!tagged || !width || !height || !pitch || !unit_seen) {
            parse_fail(origin, line_no,
                       "data before the complete header (retardation_map tag, width, height, "
                       "pixel_pitch_um, unit)");
        }
        in_data = true;
        ++rows;
        if (rows > *height) {
            parse_fail(origin, line_no, "more data rows than the declared height");
        }
        const auto fields = split(line, ',');
        if (fields.size() != *width) {
            std::ostringstream os;
            os << "row " << rows << " has " << fields.size() << " values, width is " << *width;
            parse_fail(origin, line_no, os.str());
        }
        for (const auto& f : fields) {
            const auto tok = trim(f);
            if (equals_ignore_case(tok, "nan")) {
                values.push_back(0.0);
                mask.push_back(0);
                continue;
            }
            double v;
            if (!parse_double_strict(tok, v) || !std::isfinite(v)) {
                parse_fail(origin, line_no, "'" + std::string(tok) + "' is not a number");
            }
            if (v < 0.0) {
                parse_fail(origin, line_no, "negative retardation");
            }
            values.push_back(v);
            mask.push_back(1);
        }
    }
    if (!tagged) {
        throw ValidationError(origin + ": missing '# retardation_map' tag");
    }
    if (!width || !height || !pitch || !unit_seen) {
        throw ValidationError(origin + ": incomplete header (need width, height, "
                                       "pixel_pitch_um, unit)");
    }
    if (rows != *height) {
        std::ostringstream os;
        os << origin << ": expected " << *height << " data rows, got " << rows;
        throw ValidationError(os.str());
    }
    try {
        return RetardationMap(*width, *height, *pitch, std::move(values), std::move(mask));
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

RetardationMap parse_map(const std::string& path) {
    return parse_map_text(read_text_file(path), path);
}

std::string map_to_text(const RetardationMap& m) {
    std::ostringstream os;
    os << "# retardation_map\n";
    os << "# width: " << m.width() << '\n';
    os << "# height: " << m.height() << '\n';
    os << "# pixel_pitch_um: " << format_double(m.pixel_pitch_um()) << '\n';
    os << "# unit: nm\n";
    for (std::size_t y = 0; y < m.height(); ++y) {
        for (std::size_t x = 0; x < m.width(); ++x) {
            if (x) os << ',';
            const std::size_t i = y * m.width() + x;
            if (m.mask()[i]) {
                os << format_double(m.values()[i]);
            } else {
                os << "nan";
            }
        }
        os << '\n';
    }
    return os.str();
}

void write_map(const RetardationMap& m, const std::string& path) {
    write_text_file(path, map_to_text(m));
}

std::vector<CorrelationPoint> parse_correlation_text(const std::string& text,
                                                     const std::string& origin) {
    std::vector<CorrelationPoint> points;
    const auto lines = split_lines(text);
    bool seen_content = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const std::string_view line = trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        // the canonical column-name row may appear once, before any data
        if (!seen_content &&
            (line == "sample_id,p1_ppm,metric,metric_err" || line == "sample_id,p1_ppm,metric")) {
            seen_content = true;
            continue;
        }
        seen_content = true;
        const auto fields = split(line, ',');
        if (fields.size() != 3 && fields.size() != 4) {
            std::ostringstream os;
            os << "expected 'sample_id,p1_ppm,metric[,metric_err]', got " << fields.size()
               << " fields";
            parse_fail(origin, line_no, os.str());
        }
        CorrelationPoint p;
        p.sample_id = std::string(trim(fields[0]));
        if (p.sample_id.empty()) {
            parse_fail(origin, line_no, "sample_id must not be empty");
        }
        if (!parse_double_strict(fields[1], p.p1_ppm) || !std::isfinite(p.p1_ppm) ||
            !(p.p1_ppm > 0.0)) {
            parse_fail(origin, line_no, "p1_ppm must be a positive number");
        }
        if (!parse_double_strict(fields[2], p.y) || !std::isfinite(p.y) || !(p.y > 0.0)) {
            parse_fail(origin, line_no, "metric must be a positive number");
        }
        if (fields.size() == 4 && !trim(fields[3]).empty()) {
            double e;
            if (!parse_double_strict(fields[3], e) || !std::isfinite(e) || !(e > 0.0)) {
                parse_fail(origin, line_no, "metric_err must be a positive number when given");
            }
            p.y_err = e;
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::vector<CorrelationPoint> parse_correlation_csv(const std::string& path) {
    return parse_correlation_text(read_text_file(path), path);
}

std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin) {
    std::map<std::string, std::string> out;
    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        const std::string_view line = trim(lines[li]);
        if (line.empty() || line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            parse_fail(origin, line_no, "expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            parse_fail(origin, line_no, "empty key");
        }
        out[std::string(key)] = std::string(value);
    }
    return out;
}

std::map<std::string, std::string> parse_config(const std::string& path) {
    return parse_config_text(read_text_file(path), path);
}

std::optional<double> parse_strict_double(std::string_view token) {
    double v;
    if (!parse_double_strict(token, v)) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_strict_u64(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    std::uint64_t v;
    auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return std::nullopt;
    return v;
}

}  // namespace nvoptics
