#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "nvoptics/types.hpp"

namespace nvoptics {

// Transmittance of a plate whose surfaces reflect a total fraction r_total of
// incident light. The default is the measured value for diamond in an
// integrating sphere; from_index() gives the two-surface Fresnel prediction
// for a given refractive index instead.
struct ReflectanceModel {
    double r_total = 0.2913;

    ReflectanceModel() = default;
    explicit ReflectanceModel(double r_total_);

    static ReflectanceModel from_index(double refractive_index);
};

// Single-surface and two-surface (multiple internal reflection) Fresnel
// reflectance at normal incidence for a plate in air.
double fresnel_single_surface(double refractive_index);
double fresnel_total_reflectance(double refractive_index);

// Transmittance may exceed the lossless ceiling 1 - r_total by at most this
// much before conversion refuses; anything inside the band clamps to A = 0.
inline constexpr double kSuperphysicalTol = 1e-6;

// Decadic absorption coefficient (cm^-1) from integrating-sphere transmittance.
// Sets *clamped when T sat in the superphysical tolerance band above the
// lossless ceiling and was treated as lossless.
double absorption_coefficient_integrating(double transmittance, double thickness_cm,
                                          const ReflectanceModel& model = {},
                                          bool* clamped = nullptr);

// Exact inverse of the above: transmittance a plate with absorption
// coefficient a_cm (cm^-1) produces under the same reflectance model.
double transmittance_forward(double a_cm, double thickness_cm,
                             const ReflectanceModel& model = {});

// Reflection-free Beer-Lambert conversion, for instruments that already
// reference out the surface losses.
double absorption_coefficient_simple(double transmittance, double thickness_cm);

enum class ConversionMode { IntegratingSphere, Simple };

struct ConversionStats {
    std::size_t clamped_count = 0;        // points in the superphysical band
    std::vector<std::size_t> clamped_indices;
};

// Convert a transmittance spectrum to an absorption-coefficient spectrum
// point by point. Throws ValidationError if any point exceeds the ceiling by
// more than the tolerance (integrating-sphere mode only).
Spectrum spectrum_to_absorption(const Spectrum& transmittance, const SampleGeometry& geometry,
                                ConversionMode mode, const ReflectanceModel& model = {},
                                ConversionStats* stats = nullptr);

// Trapezoidal integral and width-normalized mean of a spectrum over
// [lo_nm, hi_nm]. Band edges are clipped to the grid. The try_ variants
// report a band with no grid overlap as nullopt; the plain ones throw.
std::optional<double> try_band_integral(const Spectrum& s, double lo_nm, double hi_nm);
std::optional<double> try_band_average(const Spectrum& s, double lo_nm, double hi_nm);
double band_integral(const Spectrum& s, double lo_nm, double hi_nm);
double band_average(const Spectrum& s, double lo_nm, double hi_nm);

}  // namespace nvoptics
