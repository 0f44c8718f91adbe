#include "nvoptics/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nvoptics/absorption.hpp"
#include "nvoptics/errors.hpp"

namespace nvoptics {

namespace {

void check_positive_points(const std::vector<CorrelationPoint>& points) {
    for (const auto& p : points) {
        if (!(p.p1_ppm > 0.0) || !(p.y > 0.0) || !std::isfinite(p.p1_ppm) ||
            !std::isfinite(p.y)) {
            throw ValidationError("correlation point '" + p.sample_id +
                                  "' needs positive finite p1_ppm and metric for a log-log fit");
        }
    }
}

}  // namespace

PowerLawFit power_law_fit(const std::vector<CorrelationPoint>& points, bool weighted) {
    if (points.size() < 2) {
        throw ValidationError("power-law fit needs at least 2 points");
    }
    check_positive_points(points);

    const double ln10 = std::log(10.0);
    std::vector<double> x(points.size()), y(points.size()), w(points.size(), 1.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        x[i] = std::log10(points[i].p1_ppm);
        y[i] = std::log10(points[i].y);
        if (weighted) {
            if (!points[i].y_err || !(*points[i].y_err > 0.0)) {
                throw ValidationError("weighted fit needs a positive y_err on every point ('" +
                                      points[i].sample_id + "' lacks one)");
            }
            const double sigma_log = *points[i].y_err / (points[i].y * ln10);
            w[i] = 1.0 / (sigma_log * sigma_log);
        }
    }

    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    double xm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        xm += w[i] * x[i];
        ym += w[i] * y[i];
    }
    xm /= wsum;
    ym /= wsum;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += w[i] * (x[i] - xm) * (x[i] - xm);
        sxy += w[i] * (x[i] - xm) * (y[i] - ym);
        syy += w[i] * (y[i] - ym) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) {
        throw NumericalError("power-law fit is degenerate: all p1_ppm values coincide");
    }
    PowerLawFit fit;
    fit.b = sxy / sxx;
    fit.a = std::pow(10.0, ym - fit.b * xm);
    fit.n_points = points.size();
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (ym + fit.b * (x[i] - xm));
        ss_res += w[i] * r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

bool superlinear_flag(const PowerLawFit& fit) { return fit.b > 1.0; }

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

TrendResult monotonic_trend(const std::vector<CorrelationPoint>& points) {
    if (points.size() < 3) {
        throw ValidationError("trend analysis needs at least 3 points");
    }
    std::vector<double> p1(points.size()), y(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].p1_ppm) || !std::isfinite(points[i].y)) {
            throw ValidationError("correlation point '" + points[i].sample_id +
                                  "' has a non-finite value");
        }
        p1[i] = points[i].p1_ppm;
        y[i] = points[i].y;
    }
    const auto rx = average_ranks(p1);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(points.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
        sxy += (rx[i] - mx) * (ry[i] - my);
    }
    TrendResult out;
    out.spearman_rho = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    out.decreasing = out.spearman_rho < 0.0;
    return out;
}

namespace {

StageComparison compare_stages_impl(const std::vector<std::pair<StageLabel, Spectrum>>& records,
                                    const SampleGeometry& geom, const ComponentModel& model) {
    (void)geom;  // thickness plays no role once spectra are absorption
    if (records.size() < 2) {
        throw ValidationError("stage comparison needs at least 2 stages");
    }
    std::vector<StageLabel> labels;
    labels.reserve(records.size());
    for (const auto& r : records) labels.push_back(r.first);
    check_stage_order(labels);

    StageComparison cmp;
    for (const auto& [label, spectrum] : records) {
        if (spectrum.kind() != SpectrumKind::AbsorptionCoefficient) {
            throw ValidationError("stage comparison expects absorption spectra");
        }
        if (spectrum.grid().front() > 680.0 || spectrum.grid().back() < 760.0) {
            throw ValidationError("stage spectrum for '" + to_string(label) +
                                  "' does not cover the 680-760 nm band");
        }
        StageMetrics m;
        m.label = label;
        m.band_avg_680_760 = band_average(spectrum, 680.0, 760.0);
        const auto fit = fit_components(spectrum, model);
        const auto features = residual_features(fit);
        m.gr1_metric = features.gr1_metric;
        m.nv_band_metric = features.nv_band_metric;
        cmp.stages.push_back(std::move(m));
    }
    for (std::size_t i = 1; i < cmp.stages.size(); ++i) {
        const auto& a = cmp.stages[i - 1];
        const auto& b = cmp.stages[i];
        StageDelta d;
        d.from = a.label;
        d.to = b.label;
        d.band_avg_delta = b.band_avg_680_760 - a.band_avg_680_760;
        if (a.gr1_metric && b.gr1_metric) d.gr1_delta = *b.gr1_metric - *a.gr1_metric;
        if (a.nv_band_metric && b.nv_band_metric) {
            d.nv_band_delta = *b.nv_band_metric - *a.nv_band_metric;
        }
        cmp.deltas.push_back(d);
    }

    auto find = [&](StageLabel l) -> const StageMetrics* {
        for (const auto& m : cmp.stages) {
            if (m.label == l) return &m;
        }
        return nullptr;
    };
    const auto* irr = find(StageLabel::Irradiated);
    const auto* ann = find(StageLabel::Annealed);
    if (irr && ann) {
        cmp.anneal_recovered = ann->band_avg_680_760 < irr->band_avg_680_760;
    }
    if (irr) {
        cmp.over_irradiated = over_irradiation_flag(cmp, OverIrradiationThresholds{});
    }
    return cmp;
}

}  // namespace

StageComparison compare_stages(const std::vector<std::pair<TreatmentStage, Spectrum>>& records,
                               const SampleGeometry& geom, const ComponentModel& model) {
    std::vector<std::pair<StageLabel, Spectrum>> labeled;
    labeled.reserve(records.size());
    for (const auto& [stage, spectrum] : records) labeled.emplace_back(stage.label, spectrum);
    return compare_stages_impl(labeled, geom, model);
}

StageComparison compare_stages(const std::vector<std::pair<StageLabel, Spectrum>>& records,
                               const SampleGeometry& geom, const ComponentModel& model) {
    return compare_stages_impl(records, geom, model);
}

bool over_irradiation_flag(const StageComparison& cmp,
                           const OverIrradiationThresholds& thresholds) {
    const StageMetrics* as_grown = nullptr;
    const StageMetrics* irradiated = nullptr;
    const StageMetrics* annealed = nullptr;
    for (const auto& m : cmp.stages) {
        if (m.label == StageLabel::AsGrown) as_grown = &m;
        if (m.label == StageLabel::Irradiated) irradiated = &m;
        if (m.label == StageLabel::Annealed) annealed = &m;
    }
    if (!irradiated) {
        throw ValidationError("over-irradiation check needs an Irradiated stage");
    }
    if (!irradiated->gr1_metric || !(*irradiated->gr1_metric > thresholds.gr1_min)) {
        return false;
    }
    if (annealed && as_grown) {
        return annealed->band_avg_680_760 - as_grown->band_avg_680_760 >
               thresholds.residual_700_min;
    }
    return true;
}

MapPairComparison map_pair_compare(const DeltaNMap& before, const DeltaNMap& after) {
    if (before.width() != after.width() || before.height() != after.height()) {
        std::ostringstream os;
        os << "map shapes differ: " << before.width() << 'x' << before.height() << " vs "
           << after.width() << 'x' << after.height();
        throw ValidationError(os.str());
    }
    MapPairComparison out;
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < before.values().size(); ++i) {
        if (!before.mask()[i] || !after.mask()[i]) continue;
        const double d = after.values()[i] - before.values()[i];
        ++n;
        const double d1 = d - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (d - mean);
    }
    if (n == 0) {
        throw ValidationError("maps share no jointly valid pixels");
    }
    out.mean_delta = mean;
    out.std_delta = std::sqrt(m2 / static_cast<double>(n));
    out.joint_valid = n;
    out.reduced = mean < 0.0;
    return out;
}

}  // namespace nvoptics
