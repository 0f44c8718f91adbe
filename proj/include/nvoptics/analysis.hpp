#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nvoptics/birefringence.hpp"
#include "nvoptics/decomposition.hpp"
#include "nvoptics/types.hpp"

namespace nvoptics {

struct CorrelationPoint {
    std::string sample_id;
    double p1_ppm = 0.0;
    double y = 0.0;                 // band-average absorption or mean delta-n
    std::optional<double> y_err;    // standard deviation of y, reported but unused
                                    // unless the weighted fit is requested
};

struct PowerLawFit {
    double a = 0.0;   // prefactor in y = a * x^b
    double b = 0.0;   // exponent
    double r2 = 0.0;  // coefficient of determination in log-log space
    std::size_t n_points = 0;
};

// Ordinary least squares of log10(y) on log10(p1). With weighted = true,
// points are weighted by 1/sigma^2 in log space, sigma = y_err / (y ln 10);
// every point then needs a positive y_err.
PowerLawFit power_law_fit(const std::vector<CorrelationPoint>& points, bool weighted = false);

// b strictly above 1.
bool superlinear_flag(const PowerLawFit& fit);

struct TrendResult {
    double spearman_rho = 0.0;
    bool decreasing = false;
};

// Spearman rank correlation of y against p1 with average ranks for ties; a
// rankless (all-tie) side yields rho = 0.
TrendResult monotonic_trend(const std::vector<CorrelationPoint>& points);

struct StageMetrics {
    StageLabel label = StageLabel::AsGrown;
    double band_avg_680_760 = 0.0;          // cm^-1
    std::optional<double> gr1_metric;        // cm^-1*nm, from the decomposition residual
    std::optional<double> nv_band_metric;    // cm^-1*nm
};

struct StageDelta {
    StageLabel from = StageLabel::AsGrown;
    StageLabel to = StageLabel::AsGrown;
    double band_avg_delta = 0.0;             // later minus earlier
    std::optional<double> gr1_delta;
    std::optional<double> nv_band_delta;
};

struct OverIrradiationThresholds {
    double gr1_min = 0.5;            // cm^-1*nm of GR1-window residual at Irradiated
    double residual_700_min = 0.05;  // cm^-1 of final band-average excess over AsGrown
};

struct StageComparison {
    std::vector<StageMetrics> stages;  // in treatment order
    std::vector<StageDelta> deltas;    // consecutive pairs
    bool over_irradiated = false;      // evaluated with default thresholds
    bool anneal_recovered = false;     // annealed band average dropped below irradiated
};

// Band average over 680-760 nm plus decomposition residual features per
// stage, with consecutive-stage deltas. Stages must arrive in treatment
// order. The geometry is carried through to reports; the spectra are already
// absorption coefficients. The label-keyed overload serves callers that know
// the stage sequence but not the treatment parameters.
StageComparison compare_stages(const std::vector<std::pair<TreatmentStage, Spectrum>>& records,
                               const SampleGeometry& geom, const ComponentModel& model);
StageComparison compare_stages(const std::vector<std::pair<StageLabel, Spectrum>>& records,
                               const SampleGeometry& geom, const ComponentModel& model);

// True iff the GR1 residual at Irradiated exceeds gr1_min and, when both
// AsGrown and Annealed are present, the final band average still exceeds the
// as-grown one by more than residual_700_min.
bool over_irradiation_flag(const StageComparison& cmp,
                           const OverIrradiationThresholds& thresholds = {});

struct MapPairComparison {
    double mean_delta = 0.0;  // after minus before over jointly valid pixels
    double std_delta = 0.0;   // population normalization
    std::size_t joint_valid = 0;
    bool reduced = false;     // mean_delta < 0
};

// Pixelwise after-minus-before statistics; grids must have identical shapes,
// masks are intersected. No registration is attempted.
MapPairComparison map_pair_compare(const DeltaNMap& before, const DeltaNMap& after);

}  // namespace nvoptics
