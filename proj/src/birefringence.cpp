#include "nvoptics/birefringence.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "nvoptics/errors.hpp"

namespace nvoptics {

namespace {

std::size_t validate_grid(std::size_t width, std::size_t height, double pitch_um,
                          const std::vector<double>& values, const std::vector<std::uint8_t>& mask,
                          const char* quantity) {
    if (width == 0 || height == 0) {
        throw ValidationError("map dimensions must be positive");
    }
    if (!(pitch_um > 0.0)) {
        throw ValidationError("pixel pitch must be positive");
    }
    if (values.size() != width * height || mask.size() != width * height) {
        std::ostringstream os;
        os << "map expects " << width * height << " pixels, got " << values.size()
           << " values and " << mask.size() << " mask entries";
        throw ValidationError(os.str());
    }
    std::size_t valid = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!mask[i]) continue;
        ++valid;
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            std::ostringstream os;
            os << quantity << " must be finite and non-negative on valid pixels; pixel " << i
               << " is " << values[i];
            throw ValidationError(os.str());
        }
    }
    if (valid == 0) {
        throw ValidationError("map has no valid pixels");
    }
    return valid;
}

}  // namespace

RetardationMap::RetardationMap(std::size_t width, std::size_t height, double pixel_pitch_um,
                               std::vector<double> values_nm, std::vector<std::uint8_t> mask)
    : width_(width),
      height_(height),
      pitch_um_(pixel_pitch_um),
      values_(std::move(values_nm)),
      mask_(std::move(mask)),
      valid_count_(validate_grid(width_, height_, pitch_um_, values_, mask_, "retardation")) {}

DeltaNMap::DeltaNMap(std::size_t width, std::size_t height, double pixel_pitch_um,
                     std::vector<double> values, std::vector<std::uint8_t> mask)
    : width_(width),
      height_(height),
      pitch_um_(pixel_pitch_um),
      values_(std::move(values)),
      mask_(std::move(mask)),
      valid_count_(validate_grid(width_, height_, pitch_um_, values_, mask_, "birefringence")) {}

DeltaNMap delta_n_map(const RetardationMap& m, const SampleGeometry& geom) {
    const double d_nm = geom.thickness_nm();
    std::vector<double> out(m.values().size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = m.mask()[i] ? m.values()[i] / d_nm : m.values()[i];
    }
    return DeltaNMap(m.width(), m.height(), m.pixel_pitch_um(), std::move(out), m.mask());
}

MapStats map_stats(const DeltaNMap& m) {
    MapStats s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    // Welford running moments; the test suite cross-checks against a
    // separate two-pass accumulation.
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < m.values().size(); ++i) {
        if (!m.mask()[i]) continue;
        const double v = m.values()[i];
        ++n;
        const double d1 = v - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (v - mean);
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = mean;
    s.std_dev = std::sqrt(m2 / static_cast<double>(n));
    s.valid_fraction = static_cast<double>(n) / static_cast<double>(m.values().size());
    return s;
}

bool classify_ultra_low(const MapStats& stats) { return stats.mean < 1e-5; }

double worst_case_loss(double delta_n, double thickness_cm, double lambda_nm) {
    if (!(delta_n >= 0.0)) {
        throw ValidationError("birefringence must be non-negative");
    }
    if (!(thickness_cm > 0.0)) {
        throw ValidationError("thickness must be positive");
    }
    if (!(lambda_nm > 0.0)) {
        throw ValidationError("wavelength must be positive");
    }
    constexpr double pi = 3.14159265358979323846;
    const double d_nm = thickness_cm * 1e7;
    const double phase = pi * delta_n * d_nm / lambda_nm;
    const double s = std::sin(phase);
    return s * s;
}

LossMap loss_map(const DeltaNMap& m, const SampleGeometry& geom, double lambda_nm) {
    LossMap out{m.width(), m.height(), m.pixel_pitch_um(), std::vector<double>(m.values().size()),
                m.mask()};
    const double d_cm = geom.thickness_cm();
    for (std::size_t i = 0; i < m.values().size(); ++i) {
        out.values[i] = m.mask()[i] ? worst_case_loss(m.values()[i], d_cm, lambda_nm) : 0.0;
    }
    return out;
}

}  // namespace nvoptics
