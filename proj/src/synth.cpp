#include "nvoptics/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvoptics/errors.hpp"
#include "nvoptics/rng.hpp"

namespace nvoptics {

void SynthSpec::validate() const {
    model.validate();
    if (coefficients.size() != model.component_count()) {
        std::ostringstream os;
        os << "spec has " << coefficients.size() << " coefficients but the model has "
           << model.component_count() << " components";
        throw ValidationError(os.str());
    }
    for (double c : coefficients) {
        if (!(c >= 0.0)) throw ValidationError("component coefficients must be non-negative");
    }
    if (!(noise.multiplicative_sigma >= 0.0)) {
        throw ValidationError("noise sigma must be non-negative");
    }
    for (const auto& b : extra_features) {
        if (!(b.fwhm_nm > 0.0)) throw ValidationError("bump fwhm must be positive");
        if (!(b.amplitude >= 0.0)) throw ValidationError("bump amplitude must be non-negative");
    }
}

Spectrum synth_absorption(const SynthSpec& spec, const WavelengthGrid& grid) {
    spec.validate();
    const auto cols = component_columns(spec.model, grid);
    std::vector<double> a(grid.size(), 0.0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t i = 0; i < grid.size(); ++i) a[i] += spec.coefficients[j] * cols[j][i];
    }
    for (const auto& bump : spec.extra_features) {
        const auto shape = gaussian_band(bump.center_nm, bump.fwhm_nm, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) a[i] += bump.amplitude * shape[i];
    }
    if (spec.noise.multiplicative_sigma > 0.0) {
        SplitMix64 rng(spec.noise.seed);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            a[i] = std::max(0.0, a[i] * (1.0 + spec.noise.multiplicative_sigma * rng.normal()));
        }
    }
    return Spectrum(grid, std::move(a), SpectrumKind::AbsorptionCoefficient,
                    SpectrumRole::Measured);
}

Spectrum synth_transmittance(const SynthSpec& spec, const WavelengthGrid& grid) {
    const Spectrum absorption = synth_absorption(spec, grid);
    const double d_cm = spec.geometry.thickness_cm();
    std::vector<double> t(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        t[i] = transmittance_forward(absorption.values()[i], d_cm, spec.reflectance);
    }
    return Spectrum(grid, std::move(t), SpectrumKind::Transmittance, SpectrumRole::Measured);
}

void MapSynthSpec::validate() const {
    if (width == 0 || height == 0) throw ValidationError("map dimensions must be positive");
    if (!(pixel_pitch_um > 0.0)) throw ValidationError("pixel pitch must be positive");
    (void)SampleGeometry(thickness_um);  // reuse the thickness range check
    if (!(baseline_delta_n >= 0.0)) throw ValidationError("baseline must be non-negative");
    if (!(noise_sigma_nm >= 0.0)) throw ValidationError("noise sigma must be non-negative");
    for (const auto& b : blobs) {
        if (!(b.radius_px > 0.0)) throw ValidationError("blob radius must be positive");
    }
}

RetardationMap synth_retardation_map(const MapSynthSpec& spec, std::size_t* clamped_count) {
    spec.validate();
    if (clamped_count) *clamped_count = 0;
    const double d_nm = SampleGeometry(spec.thickness_um).thickness_nm();
    const std::size_t total = spec.width * spec.height;
    std::vector<double> gamma(total);
    std::vector<std::uint8_t> mask(total, 1);

    const double cx = 0.5 * static_cast<double>(spec.width - 1);
    const double cy = 0.5 * static_cast<double>(spec.height - 1);
    const double ax = 0.5 * static_cast<double>(spec.width);   // ellipse semi-axes
    const double ay = 0.5 * static_cast<double>(spec.height);

    SplitMix64 rng(spec.seed);
    for (std::size_t y = 0; y < spec.height; ++y) {
        for (std::size_t x = 0; x < spec.width; ++x) {
            const std::size_t i = y * spec.width + x;
            if (spec.mask_shape == MaskShape::Ellipse) {
                const double ex = (static_cast<double>(x) - cx) / ax;
                const double ey = (static_cast<double>(y) - cy) / ay;
                if (ex * ex + ey * ey > 1.0) mask[i] = 0;
            }
            double dn = spec.baseline_delta_n;
            for (const auto& b : spec.blobs) {
                const double dx = static_cast<double>(x) - b.center_x_px;
                const double dy = static_cast<double>(y) - b.center_y_px;
                dn += b.amplitude *
                      std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius_px * b.radius_px));
            }
            double g = d_nm * dn;
            if (spec.noise_sigma_nm > 0.0) {
                g += spec.noise_sigma_nm * rng.normal();
            }
            if (!mask[i]) {
                gamma[i] = 0.0;
                continue;
            }
            if (g < 0.0) {
                g = 0.0;
                if (clamped_count) ++*clamped_count;
            }
            gamma[i] = g;
        }
    }
    return RetardationMap(spec.width, spec.height, spec.pixel_pitch_um, std::move(gamma),
                          std::move(mask));
}

}  // namespace nvoptics
