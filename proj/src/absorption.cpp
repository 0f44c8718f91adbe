#include "nvoptics/absorption.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvoptics/errors.hpp"

namespace nvoptics {

ReflectanceModel::ReflectanceModel(double r_total_) : r_total(r_total_) {
    if (!(r_total > 0.0 && r_total < 1.0)) {
        std::ostringstream os;
        os << "total reflectance must lie in (0,1), got " << r_total;
        throw ValidationError(os.str());
    }
}

ReflectanceModel ReflectanceModel::from_index(double refractive_index) {
    return ReflectanceModel(fresnel_total_reflectance(refractive_index));
}

double fresnel_single_surface(double refractive_index) {
    if (!(refractive_index > 1.0)) {
        throw ValidationError("refractive index must exceed 1");
    }
    const double r = (refractive_index - 1.0) / (refractive_index + 1.0);
    return r * r;
}

double fresnel_total_reflectance(double refractive_index) {
    // Two surfaces with incoherent multiple internal reflections:
    // R_t = 2R / (1 + R), which pairs with a lossless transmittance of
    // (1 - R) / (1 + R) so the two sum to one.
    const double r = fresnel_single_surface(refractive_index);
    return 2.0 * r / (1.0 + r);
}

double absorption_coefficient_integrating(double transmittance, double thickness_cm,
                                          const ReflectanceModel& model, bool* clamped) {
    if (clamped) *clamped = false;
    if (!(transmittance > 0.0)) {
        throw ValidationError("transmittance must be positive");
    }
    if (!(thickness_cm > 0.0)) {
        throw ValidationError("thickness must be positive");
    }
    const double u = (1.0 - model.r_total) * (1.0 - model.r_total);
    const double ceiling = 1.0 - model.r_total;  // lossless plate
    if (transmittance > ceiling) {
        if (transmittance > ceiling + kSuperphysicalTol) {
            std::ostringstream os;
            os << "transmittance " << transmittance << " exceeds the lossless ceiling "
               << ceiling << " by more than " << kSuperphysicalTol;
            throw ValidationError(os.str());
        }
        if (clamped) *clamped = true;
        return 0.0;
    }
    const double T = transmittance;
    // G = sqrt(4T^2 + (u - T^2)^2) - (u - T^2). For T far below the ceiling
    // u - T^2 dominates and the subtraction cancels, so use the conjugate.
    const double w = u - T * T;
    double g;
    if (w > 0.0) {
        g = 4.0 * T * T / (std::sqrt(w * w + 4.0 * T * T) + w);
    } else {
        g = std::sqrt(w * w + 4.0 * T * T) - w;
    }
    const double ratio = g / (2.0 * T);
    return -std::log10(ratio) / thickness_cm;
}

double transmittance_forward(double a_cm, double thickness_cm, const ReflectanceModel& model) {
    if (!(a_cm >= 0.0)) {
        throw ValidationError("absorption coefficient must be non-negative");
    }
    if (!(thickness_cm > 0.0)) {
        throw ValidationError("thickness must be positive");
    }
    const double u = (1.0 - model.r_total) * (1.0 - model.r_total);
    const double x = std::pow(10.0, -a_cm * thickness_cm);  // internal transmission
    // Positive root of x T^2 - (x^2 - 1) T - x u = 0, written so x -> 0 and
    // x -> 1 are both cancellation-free.
    const double one_minus_x2 = (1.0 - x) * (1.0 + x);
    const double s = std::sqrt(one_minus_x2 * one_minus_x2 + 4.0 * x * x * u);
    return 2.0 * x * u / (s + one_minus_x2);
}

double absorption_coefficient_simple(double transmittance, double thickness_cm) {
    if (!(transmittance > 0.0 && transmittance <= 1.0)) {
        throw ValidationError("transmittance must lie in (0,1]");
    }
    if (!(thickness_cm > 0.0)) {
        throw ValidationError("thickness must be positive");
    }
    return -std::log10(transmittance) / thickness_cm;
}

Spectrum spectrum_to_absorption(const Spectrum& transmittance, const SampleGeometry& geometry,
                                ConversionMode mode, const ReflectanceModel& model,
                                ConversionStats* stats) {
    if (transmittance.kind() != SpectrumKind::Transmittance) {
        throw ValidationError("spectrum_to_absorption expects a transmittance spectrum");
    }
    const double d_cm = geometry.thickness_cm();
    std::vector<double> out(transmittance.size());
    if (stats) *stats = ConversionStats{};
    for (std::size_t i = 0; i < transmittance.size(); ++i) {
        const double t = transmittance.values()[i];
        if (mode == ConversionMode::Simple) {
            out[i] = absorption_coefficient_simple(t, d_cm);
        } else {
            bool clamped = false;
            try {
                out[i] = absorption_coefficient_integrating(t, d_cm, model, &clamped);
            } catch (const ValidationError& e) {
                std::ostringstream os;
                os << "at " << transmittance.grid()[i] << " nm: " << e.what();
                throw ValidationError(os.str());
            }
            if (clamped && stats) {
                ++stats->clamped_count;
                stats->clamped_indices.push_back(i);
            }
        }
    }
    return Spectrum(transmittance.grid(), std::move(out), SpectrumKind::AbsorptionCoefficient,
                    SpectrumRole::Measured);
}

namespace {

// Trapezoidal integral over the band, linearly interpolating the spectrum at
// clipped band edges that fall between grid points.
std::optional<double> band_integral_impl(const Spectrum& s, double lo_nm, double hi_nm) {
    const auto& w = s.grid().values();
    const auto& v = s.values();
    const double lo = std::max(lo_nm, w.front());
    const double hi = std::min(hi_nm, w.back());
    if (!(lo < hi)) return std::nullopt;

    auto value_at = [&](double x) {
        auto it = std::lower_bound(w.begin(), w.end(), x);
        if (it == w.begin()) return v.front();
        if (it == w.end()) return v.back();
        if (*it == x) return v[static_cast<std::size_t>(it - w.begin())];
        const std::size_t j = static_cast<std::size_t>(it - w.begin());
        const double t = (x - w[j - 1]) / (w[j] - w[j - 1]);
        return v[j - 1] + t * (v[j] - v[j - 1]);
    };

    double acc = 0.0;
    double prev_x = lo;
    double prev_y = value_at(lo);
    for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] <= lo) continue;
        if (w[j] >= hi) break;
        acc += 0.5 * (prev_y + v[j]) * (w[j] - prev_x);
        prev_x = w[j];
        prev_y = v[j];
    }
    acc += 0.5 * (prev_y + value_at(hi)) * (hi - prev_x);
    return acc;
}

}  // namespace

std::optional<double> try_band_integral(const Spectrum& s, double lo_nm, double hi_nm) {
    if (!(lo_nm < hi_nm)) {
        throw ValidationError("band bounds must satisfy lo < hi");
    }
    return band_integral_impl(s, lo_nm, hi_nm);
}

std::optional<double> try_band_average(const Spectrum& s, double lo_nm, double hi_nm) {
    if (!(lo_nm < hi_nm)) {
        throw ValidationError("band bounds must satisfy lo < hi");
    }
    const auto& w = s.grid().values();
    const double lo = std::max(lo_nm, w.front());
    const double hi = std::min(hi_nm, w.back());
    if (!(lo < hi)) return std::nullopt;
    auto integral = band_integral_impl(s, lo_nm, hi_nm);
    if (!integral) return std::nullopt;
    return *integral / (hi - lo);
}

namespace {

[[noreturn]] void throw_empty_band(double lo_nm, double hi_nm, const Spectrum& s) {
    std::ostringstream os;
    os << "band [" << lo_nm << ", " << hi_nm << "] nm does not overlap the grid ["
       << s.grid().front() << ", " << s.grid().back() << "] nm";
    throw ValidationError(os.str());
}

}  // namespace

double band_integral(const Spectrum& s, double lo_nm, double hi_nm) {
    auto v = try_band_integral(s, lo_nm, hi_nm);
    if (!v) throw_empty_band(lo_nm, hi_nm, s);
    return *v;
}

double band_average(const Spectrum& s, double lo_nm, double hi_nm) {
    auto v = try_band_average(s, lo_nm, hi_nm);
    if (!v) throw_empty_band(lo_nm, hi_nm, s);
    return *v;
}

}  // namespace nvoptics
