#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nvoptics/types.hpp"

namespace nvoptics {

struct GaussianBand {
    double center_nm = 0.0;
    double fwhm_nm = 0.0;
};

enum class RampForm { PowerLaw, Exponential };

// The five-component model: three Gaussian bands, a monotone-decreasing ramp,
// and a pure-diamond reference spectrum ("El-offset", constant 1 when no
// reference file is supplied). Band widths and the ramp form are toolkit
// defaults, not measured values; every report echoes the model actually used.
struct ComponentModel {
    std::vector<GaussianBand> gaussians = {{270.0, 40.0}, {360.0, 100.0}, {520.0, 150.0}};
    RampForm ramp_form = RampForm::PowerLaw;
    double ramp_exponent = 3.0;                     // p in (lambda/lambda0)^-p
    double ramp_ref_nm = 300.0;                     // lambda0, where the ramp is 1
    double ramp_tau_nm = 100.0;                     // decay length of the exponential form
    std::optional<Spectrum> reference_spectrum;     // El-offset; must cover the window
    std::array<double, 2> fit_window_nm = {220.0, 800.0};
    std::vector<std::array<double, 2>> masks;       // wavelength intervals excluded from the fit

    std::size_t component_count() const { return gaussians.size() + 2; }
    void validate() const;  // throws ValidationError on any broken invariant

    // Mask preset for irradiated/annealed samples whose NV side band would
    // otherwise contaminate the fit.
    static std::vector<std::array<double, 2>> nv_band_mask() { return {{400.0, 650.0}}; }
};

// Names for report keys, aligned with the coefficient vector: cNNN per
// Gaussian (NNN = rounded center), then c_ramp, then c_offset.
std::vector<std::string> component_names(const ComponentModel& model);

struct RefinedShape {
    std::vector<double> centers_nm;
    std::vector<double> fwhms_nm;
    bool converged = false;
    int iterations = 0;
};

struct DecompositionResult {
    // One entry per model component, Gaussians first (model order), then
    // ramp, then offset. All non-negative; cm^-1 peak amplitude for
    // Gaussians, amplitude at lambda0 for the ramp, multiplier for the
    // reference.
    std::vector<double> coefficients;
    // input minus model on every grid point inside the fit window, masked
    // points included (that is where masked-out defect bands show up).
    Spectrum residual;
    double rms_residual = 0.0;  // over the unmasked points the fit actually saw
    bool converged = false;
    std::optional<RefinedShape> refined_shape;
};

struct FeatureReport {
    std::optional<double> rise_650_800_slope;  // cm^-1/nm, OLS over residual 650-800 nm
    std::optional<double> gr1_metric;          // cm^-1*nm, residual integral 500-750 nm
    std::optional<double> nv_band_metric;      // cm^-1*nm, residual integral 400-650 nm
};

// Unit-peak Gaussian: exp(-4 ln2 (lambda-center)^2 / fwhm^2).
std::vector<double> gaussian_band(double center_nm, double fwhm_nm, const WavelengthGrid& grid);

// Power-law ramp (lambda/lambda0)^-p, equal to 1 at lambda0.
std::vector<double> ramp_component(double p, double lambda0_nm, const WavelengthGrid& grid);

// Exponential alternative exp(-(lambda-lambda0)/tau), equal to 1 at lambda0.
std::vector<double> exponential_ramp(double tau_nm, double lambda0_nm, const WavelengthGrid& grid);

// Linear interpolation of a reference spectrum onto a grid; the reference
// must cover the grid span.
std::vector<double> resample_reference(const Spectrum& ref, const WavelengthGrid& grid);

// All component shapes evaluated on a grid, one column per coefficient in
// coefficient order. The fit and the synthetic generator share these columns,
// which is what makes zero-noise recovery exact.
std::vector<std::vector<double>> component_columns(const ComponentModel& model,
                                                   const WavelengthGrid& grid);

// Non-negative least squares fit of the model components to the spectrum
// over unmasked points in the fit window. Deterministic; throws
// NumericalError with pairwise component correlations if the design matrix
// is numerically degenerate.
DecompositionResult fit_components(const Spectrum& s, const ComponentModel& model);

struct RefineBounds {
    double center_delta_nm = 10.0;  // centers may move this far from the model
    double fwhm_scale_lo = 0.5;     // fwhm bounds as multiples of the model value
    double fwhm_scale_hi = 2.0;
};

// Bounded damped least-squares refinement of Gaussian centers and widths,
// re-solving the non-negative coefficients at each step. Never returns a
// worse objective than `initial`; on failure to converge within max_iter the
// initial result comes back with converged = false on the refinement record.
DecompositionResult refine_fit(const Spectrum& s, const ComponentModel& model,
                               const DecompositionResult& initial,
                               const RefineBounds& bounds = {}, int max_iter = 200);

// P1 concentration in ppm from the 270 nm peak amplitude. kappa is the
// calibration factor in ppm per cm^-1; it has no default because it is
// instrument- and convention-specific (peak amplitude, not band area).
double p1_concentration(double c270, double kappa_ppm_cm);

// Residual defect signatures: the 650-800 nm rise, the GR1 window integral,
// and the NV-band window integral. A window with no residual coverage is
// reported absent, never as zero.
FeatureReport residual_features(const DecompositionResult& result);

// Solve min ||A x - b|| subject to x >= 0 (active-set method). Exposed for
// the small-instance oracle tests; fit_components is the intended entry.
std::vector<double> nnls_solve(const std::vector<std::vector<double>>& columns,
                               const std::vector<double>& rhs);

}  // namespace nvoptics
