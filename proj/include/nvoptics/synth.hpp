#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nvoptics/absorption.hpp"
#include "nvoptics/birefringence.hpp"
#include "nvoptics/decomposition.hpp"
#include "nvoptics/types.hpp"

namespace nvoptics {

// Forward-model generators. Every test that needs ground truth builds it
// here: compose components into absorption, push through the exact
// transmittance model, add seeded noise, and the analysis side has something
// with a known answer to recover.

struct GaussianBump {
    double center_nm = 0.0;
    double fwhm_nm = 0.0;
    double amplitude = 0.0;  // cm^-1 at the peak
};

struct NoiseSpec {
    double multiplicative_sigma = 0.0;  // relative, applied in absorption domain
    std::uint64_t seed = 0;
};

struct SynthSpec {
    std::vector<double> coefficients;  // aligned with the model's component order
    ComponentModel model;
    SampleGeometry geometry{300.0};
    ReflectanceModel reflectance;
    NoiseSpec noise;
    std::vector<GaussianBump> extra_features;  // GR1/NV/H2-like injections

    void validate() const;
};

// A = sum(c_i * component_i) + sum(bumps), then per-point multiplicative
// noise A * (1 + sigma * normal), clamped at zero. One normal deviate per
// grid point, in grid order.
Spectrum synth_absorption(const SynthSpec& spec, const WavelengthGrid& grid);

// transmittance_forward applied pointwise to synth_absorption (noise lands in
// the absorption domain, before conversion).
Spectrum synth_transmittance(const SynthSpec& spec, const WavelengthGrid& grid);

enum class MaskShape { Rectangle, Ellipse };

struct MapBlob {
    double center_x_px = 0.0;
    double center_y_px = 0.0;
    double radius_px = 1.0;   // Gaussian sigma in pixels
    double amplitude = 0.0;   // delta-n units; negative carves a dip
};

struct MapSynthSpec {
    std::size_t width = 64;
    std::size_t height = 64;
    double pixel_pitch_um = 50.0;
    double thickness_um = 300.0;     // converts the delta-n field to retardation
    double baseline_delta_n = 1e-5;
    std::vector<MapBlob> blobs;
    double noise_sigma_nm = 0.0;     // absolute, in retardation nm
    std::uint64_t seed = 0;
    MaskShape mask_shape = MaskShape::Rectangle;  // Ellipse masks off corners

    void validate() const;
};

// Gamma(px) = d_nm * (baseline + sum of blob Gaussians) + noise, clamped at
// zero; clamp events are counted into *clamped_count when given. One normal
// deviate per pixel in row-major order, valid or not, so the mask shape does
// not shift the noise stream.
RetardationMap synth_retardation_map(const MapSynthSpec& spec,
                                     std::size_t* clamped_count = nullptr);

}  // namespace nvoptics
