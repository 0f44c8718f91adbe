#include <algorithm>
#include <cerrno>
#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nvoptics/absorption.hpp"
#include "nvoptics/analysis.hpp"
#include "nvoptics/birefringence.hpp"
#include "nvoptics/decomposition.hpp"
#include "nvoptics/errors.hpp"
#include "nvoptics/io.hpp"
#include "nvoptics/plot.hpp"
#include "nvoptics/report.hpp"
#include "nvoptics/synth.hpp"
#include "nvoptics/types.hpp"

namespace {

using namespace nvoptics;

std::string default_report_path(const std::string& input) { return input + ".report.json"; }

// CLI11 reads --config files only when they are registered on the top-level
// command, so the per-subcommand option is resolved by hand after parsing:
// the same flat key=value format used everywhere else in the toolkit, applied
// as defaults that explicit command-line flags override. Positional arguments
// cannot come from a config file.
void apply_config(CLI::App* cmd, const std::string& path) {
    for (const auto& [key, value] : parse_config(path)) {
        CLI::Option* opt = nullptr;
        if (key != "config") {
            opt = cmd->get_option_no_throw("--" + key);
            if (opt == nullptr && key.size() == 1) {
                opt = cmd->get_option_no_throw("-" + key);
            }
        }
        if (opt == nullptr || opt->get_positional()) {
            throw ValidationError(path + ": unknown option '" + key + "'");
        }
        if (opt->count() > 0) {
            continue;  // the command line wins
        }
        if (opt->get_expected_min() == 0) {
            errno = 0;
            const auto truthy = CLI::detail::to_flag_value(value);
            if (errno != 0) {
                throw ValidationError(path + ": '" + key + "' expects true or false");
            }
            if (truthy <= 0) continue;  // an explicit false keeps the default
        }
        try {
            opt->add_result(opt->get_expected_min() == 0 ? "true" : value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ValidationError(path + ": bad value for '" + key + "': " + e.what());
        }
    }
}

double require_double(const std::map<std::string, std::string>& cfg, const std::string& key,
                      const std::string& origin) {
    auto it = cfg.find(key);
    if (it == cfg.end()) {
        throw ValidationError(origin + ": missing required key '" + key + "'");
    }
    auto v = parse_strict_double(it->second);
    if (!v) {
        throw ValidationError(origin + ": key '" + key + "' is not a number");
    }
    return *v;
}

double double_or(const std::map<std::string, std::string>& cfg, const std::string& key,
                 double fallback, const std::string& origin) {
    auto it = cfg.find(key);
    if (it == cfg.end()) return fallback;
    auto v = parse_strict_double(it->second);
    if (!v) {
        throw ValidationError(origin + ": key '" + key + "' is not a number");
    }
    return *v;
}

std::vector<std::string> split_list(const std::string& s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<double> parse_tuple(const std::string& item, std::size_t arity,
                                const std::string& what, const std::string& origin) {
    const auto parts = split_list(item, ':');
    if (parts.size() != arity) {
        std::ostringstream os;
        os << origin << ": " << what << " '" << item << "' needs " << arity
           << " colon-separated numbers";
        throw ValidationError(os.str());
    }
    std::vector<double> out;
    for (const auto& p : parts) {
        auto v = parse_strict_double(p);
        if (!v) {
            throw ValidationError(origin + ": '" + p + "' in " + what + " is not a number");
        }
        out.push_back(*v);
    }
    return out;
}

// Model configuration keys (flat key = value):
//   gaussians   = center:fwhm;center:fwhm;...   default 270:40;360:100;520:150
//   ramp_form   = power | exponential
//   ramp_exponent, ramp_ref_nm, ramp_tau_nm
//   window      = lo:hi                          default 220:800
//   mask        = lo:hi;lo:hi;...                default none
//   reference   = path to an absorption CSV      default constant offset
struct LoadedModel {
    ComponentModel model;
    std::string reference_path;  // empty when the constant offset is in use
};

LoadedModel model_from_config(const std::map<std::string, std::string>& cfg,
                              const std::string& origin) {
    static const std::vector<std::string> known = {
        "gaussians", "ramp_form", "ramp_exponent", "ramp_ref_nm",
        "ramp_tau_nm", "window",    "mask",          "reference"};
    for (const auto& [key, value] : cfg) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ValidationError(origin + ": unknown model key '" + key + "'");
        }
    }
    LoadedModel out;
    ComponentModel& m = out.model;
    if (auto it = cfg.find("gaussians"); it != cfg.end()) {
        m.gaussians.clear();
        for (const auto& item : split_list(it->second, ';')) {
            const auto t = parse_tuple(item, 2, "gaussian", origin);
            m.gaussians.push_back({t[0], t[1]});
        }
    }
    if (auto it = cfg.find("ramp_form"); it != cfg.end()) {
        if (it->second == "power") {
            m.ramp_form = RampForm::PowerLaw;
        } else if (it->second == "exponential") {
            m.ramp_form = RampForm::Exponential;
        } else {
            throw ValidationError(origin + ": ramp_form must be power or exponential");
        }
    }
    m.ramp_exponent = double_or(cfg, "ramp_exponent", m.ramp_exponent, origin);
    m.ramp_ref_nm = double_or(cfg, "ramp_ref_nm", m.ramp_ref_nm, origin);
    m.ramp_tau_nm = double_or(cfg, "ramp_tau_nm", m.ramp_tau_nm, origin);
    if (auto it = cfg.find("window"); it != cfg.end()) {
        const auto t = parse_tuple(it->second, 2, "window", origin);
        m.fit_window_nm = {t[0], t[1]};
    }
    if (auto it = cfg.find("mask"); it != cfg.end() && !it->second.empty()) {
        for (const auto& item : split_list(it->second, ';')) {
            const auto t = parse_tuple(item, 2, "mask interval", origin);
            m.masks.push_back({t[0], t[1]});
        }
    }
    if (auto it = cfg.find("reference"); it != cfg.end() && !it->second.empty()) {
        out.reference_path = it->second;
        auto parsed = parse_spectrum(it->second);
        if (parsed.spectrum.kind() != SpectrumKind::AbsorptionCoefficient) {
            throw ValidationError(it->second + ": reference spectrum must be absorption_cm-1");
        }
        m.reference_spectrum = std::move(parsed.spectrum);
    }
    return out;
}

Json model_echo(const LoadedModel& lm) {
    const ComponentModel& m = lm.model;
    Json j;
    Json gs = Json::array();
    for (const auto& g : m.gaussians) {
        gs.push_back({{"center_nm", g.center_nm}, {"fwhm_nm", g.fwhm_nm}});
    }
    j["gaussians"] = gs;
    j["ramp_form"] = m.ramp_form == RampForm::PowerLaw ? "power" : "exponential";
    if (m.ramp_form == RampForm::PowerLaw) {
        j["ramp_exponent"] = m.ramp_exponent;
    } else {
        j["ramp_tau_nm"] = m.ramp_tau_nm;
    }
    j["ramp_ref_nm"] = m.ramp_ref_nm;
    j["fit_window_nm"] = {m.fit_window_nm[0], m.fit_window_nm[1]};
    Json masks = Json::array();
    for (const auto& mask : m.masks) masks.push_back({mask[0], mask[1]});
    j["masks"] = masks;
    j["reference"] = lm.reference_path.empty() ? "constant_offset" : lm.reference_path;
    return j;
}

Json optional_json(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

Json decomposition_json(const DecompositionResult& r, const ComponentModel& model) {
    Json j;
    const auto names = component_names(model);
    Json coeffs;
    for (std::size_t i = 0; i < names.size(); ++i) coeffs[names[i]] = r.coefficients[i];
    j["coefficients"] = coeffs;
    j["rms_residual_cm1"] = r.rms_residual;
    j["converged"] = r.converged;
    if (r.refined_shape) {
        Json rs;
        rs["centers_nm"] = r.refined_shape->centers_nm;
        rs["fwhms_nm"] = r.refined_shape->fwhms_nm;
        rs["converged"] = r.refined_shape->converged;
        rs["iterations"] = r.refined_shape->iterations;
        j["refined_shape"] = rs;
    }
    const auto features = residual_features(r);
    Json f;
    f["rise_650_800_slope_cm1_per_nm"] = optional_json(features.rise_650_800_slope);
    f["gr1_metric_cm1_nm"] = optional_json(features.gr1_metric);
    f["nv_band_metric_cm1_nm"] = optional_json(features.nv_band_metric);
    j["residual_features"] = f;
    return j;
}

// ---- absorb ----

struct AbsorbOpts {
    std::vector<std::string> inputs;
    std::string mode = "sphere";
    double rt = 0.2913;
    std::vector<double> band = {680.0, 760.0};
    std::string out;
    std::string spectrum_out;
    std::string svg;
    std::string config;
};

// Explicit output paths would overwrite each other across a batch, so they
// only make sense for a single input.
void require_single_input(std::size_t n_inputs, const std::string& flag, const std::string& value) {
    if (n_inputs > 1 && !value.empty()) {
        throw ValidationError(flag + " requires a single input file");
    }
}

void run_absorb(const AbsorbOpts& o, const std::string& input) {
    const std::string text = read_text_file(input);
    const auto parsed = parse_spectrum_text(text, input);
    if (parsed.spectrum.kind() != SpectrumKind::Transmittance) {
        throw ValidationError(input + ": absorb expects a transmittance spectrum");
    }
    if (o.mode != "sphere" && o.mode != "simple") {
        throw ValidationError("mode must be sphere or simple");
    }
    const ConversionMode mode =
        o.mode == "sphere" ? ConversionMode::IntegratingSphere : ConversionMode::Simple;
    const ReflectanceModel refl(o.rt);
    ConversionStats stats;
    const Spectrum absorption =
        spectrum_to_absorption(parsed.spectrum, *parsed.geometry, mode, refl, &stats);
    const double band_avg = band_average(absorption, o.band[0], o.band[1]);

    Json doc = report_skeleton("absorb");
    report_add_input(doc, input, text);
    doc["config"]["mode"] = o.mode;
    doc["config"]["r_total"] = o.rt;
    doc["config"]["band_nm"] = {o.band[0], o.band[1]};
    doc["config"]["thickness_um"] = parsed.geometry->thickness_um;
    doc["results"]["band_average_cm1"] = band_avg;
    doc["results"]["n_points"] = absorption.size();
    doc["results"]["clamped_points"] = stats.clamped_count;
    Json clamped = Json::array();
    for (auto i : stats.clamped_indices) clamped.push_back(absorption.grid()[i]);
    doc["results"]["clamped_wavelengths_nm"] = clamped;

    if (!o.spectrum_out.empty()) {
        write_spectrum(absorption, parsed.geometry, o.spectrum_out);
        doc["results"]["spectrum_out"] = o.spectrum_out;
    }
    if (!o.svg.empty()) {
        PlotSeries s{"absorption", absorption.grid().values(), absorption.values()};
        PlotConfig pc;
        pc.title = "Absorption coefficient";
        pc.x_label = "wavelength (nm)";
        pc.y_label = "A (cm^-1)";
        write_svg({s}, pc, o.svg);
        doc["results"]["svg_out"] = o.svg;
    }
    write_report(doc, o.out.empty() ? default_report_path(input) : o.out);
}

void run_absorb(const AbsorbOpts& o) {
    require_single_input(o.inputs.size(), "-o", o.out);
    require_single_input(o.inputs.size(), "--spectrum-out", o.spectrum_out);
    require_single_input(o.inputs.size(), "--svg", o.svg);
    for (const auto& input : o.inputs) run_absorb(o, input);
}

// ---- decompose ----

struct DecomposeOpts {
    std::vector<std::string> inputs;
    std::string model_path;
    bool refine = false;
    bool mask_nv = false;
    double kappa = 0.0;
    bool kappa_set = false;
    std::string out;
    std::string svg;
    std::string config;
};

void run_decompose(const DecomposeOpts& o, const std::string& input) {
    const std::string text = read_text_file(input);
    const auto parsed = parse_spectrum_text(text, input);
    if (parsed.spectrum.kind() != SpectrumKind::AbsorptionCoefficient) {
        throw ValidationError(input +
                              ": decompose expects an absorption spectrum (run absorb first)");
    }
    LoadedModel lm;
    if (!o.model_path.empty()) {
        lm = model_from_config(parse_config(o.model_path), o.model_path);
    }
    if (o.mask_nv) {
        for (const auto& m : ComponentModel::nv_band_mask()) lm.model.masks.push_back(m);
    }

    DecompositionResult result = fit_components(parsed.spectrum, lm.model);
    if (o.refine) {
        result = refine_fit(parsed.spectrum, lm.model, result);
    }

    Json doc = report_skeleton("decompose");
    report_add_input(doc, input, text);
    if (!o.model_path.empty()) {
        report_add_input(doc, o.model_path, read_text_file(o.model_path));
    }
    doc["config"]["model"] = model_echo(lm);
    doc["config"]["refine"] = o.refine;
    doc["config"]["kappa_ppm_cm"] = o.kappa_set ? Json(o.kappa) : Json(nullptr);
    doc["results"] = decomposition_json(result, lm.model);
    if (o.kappa_set) {
        if (lm.model.gaussians.empty()) {
            throw ValidationError("kappa given but the model has no gaussian bands");
        }
        doc["results"]["p1_ppm"] = p1_concentration(result.coefficients[0], o.kappa);
    }

    if (!o.svg.empty()) {
        const auto& grid = result.residual.grid();
        std::vector<double> input_vals, fit_vals;
        // the residual grid is the fit window; pick the matching input points
        const auto& w = parsed.spectrum.grid().values();
        std::size_t k = 0;
        for (std::size_t i = 0; i < w.size() && k < grid.size(); ++i) {
            if (w[i] == grid[k]) {
                input_vals.push_back(parsed.spectrum.values()[i]);
                fit_vals.push_back(parsed.spectrum.values()[i] - result.residual.values()[k]);
                ++k;
            }
        }
        PlotSeries data{"data", grid.values(), input_vals};
        PlotSeries fit{"fit", grid.values(), fit_vals};
        PlotSeries res{"residual", grid.values(), result.residual.values()};
        PlotConfig pc;
        pc.title = "Spectral decomposition";
        pc.x_label = "wavelength (nm)";
        pc.y_label = "A (cm^-1)";
        write_svg({data, fit, res}, pc, o.svg);
        doc["results"]["svg_out"] = o.svg;
    }
    write_report(doc, o.out.empty() ? default_report_path(input) : o.out);
}

void run_decompose(const DecomposeOpts& o) {
    require_single_input(o.inputs.size(), "-o", o.out);
    require_single_input(o.inputs.size(), "--svg", o.svg);
    for (const auto& input : o.inputs) run_decompose(o, input);
}

// ---- biref ----

struct BirefOpts {
    std::vector<std::string> inputs;
    double thickness_um = 0.0;
    double lambda_nm = 700.0;
    std::string out;
    std::string config;
};

void run_biref(const BirefOpts& o, const std::string& input) {
    const std::string text = read_text_file(input);
    const RetardationMap map = parse_map_text(text, input);
    const SampleGeometry geom(o.thickness_um);
    const DeltaNMap dn = delta_n_map(map, geom);
    const MapStats stats = map_stats(dn);
    const LossMap losses = loss_map(dn, geom, o.lambda_nm);

    double loss_min = 1.0, loss_max = 0.0, loss_sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < losses.values.size(); ++i) {
        if (!losses.mask[i]) continue;
        loss_min = std::min(loss_min, losses.values[i]);
        loss_max = std::max(loss_max, losses.values[i]);
        loss_sum += losses.values[i];
        ++n;
    }

    Json doc = report_skeleton("biref");
    report_add_input(doc, input, text);
    doc["config"]["thickness_um"] = o.thickness_um;
    doc["config"]["lambda_nm"] = o.lambda_nm;
    Json s;
    s["mean"] = stats.mean;
    s["std"] = stats.std_dev;
    s["min"] = stats.min;
    s["max"] = stats.max;
    s["valid_fraction"] = stats.valid_fraction;
    doc["results"]["delta_n"] = s;
    doc["results"]["ultra_low"] = classify_ultra_low(stats);
    Json l;
    l["mean"] = loss_sum / static_cast<double>(n);
    l["min"] = loss_min;
    l["max"] = loss_max;
    l["at_mean_delta_n"] = worst_case_loss(stats.mean, geom.thickness_cm(), o.lambda_nm);
    doc["results"]["worst_case_loss"] = l;  // upper bound at worst axis orientation
    write_report(doc, o.out.empty() ? default_report_path(input) : o.out);
}

void run_biref(const BirefOpts& o) {
    if (o.thickness_um == 0.0) {
        throw ValidationError("missing --thickness-um (set it on the command line or in the config)");
    }
    require_single_input(o.inputs.size(), "-o", o.out);
    for (const auto& input : o.inputs) run_biref(o, input);
}

// ---- stages ----

struct StagesOpts {
    std::vector<std::string> inputs;
    std::string labels;
    std::string model_path;
    bool mask_nv = false;
    double gr1_min = 0.5;
    double residual_700_min = 0.05;
    std::string out;
    std::string config;
};

void run_stages(const StagesOpts& o) {
    if (o.labels.empty()) {
        throw ValidationError("missing --labels (set it on the command line or in the config)");
    }
    const auto label_names = split_list(o.labels, ',');
    if (label_names.size() != o.inputs.size()) {
        std::ostringstream os;
        os << "--labels lists " << label_names.size() << " stages but " << o.inputs.size()
           << " files were given";
        throw ValidationError(os.str());
    }
    LoadedModel lm;
    if (!o.model_path.empty()) {
        lm = model_from_config(parse_config(o.model_path), o.model_path);
    }
    if (o.mask_nv) {
        for (const auto& m : ComponentModel::nv_band_mask()) lm.model.masks.push_back(m);
    }

    Json doc = report_skeleton("stages");
    std::vector<std::pair<StageLabel, Spectrum>> records;
    std::optional<SampleGeometry> geom;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        const std::string text = read_text_file(o.inputs[i]);
        report_add_input(doc, o.inputs[i], text);
        auto parsed = parse_spectrum_text(text, o.inputs[i]);
        if (parsed.spectrum.kind() != SpectrumKind::AbsorptionCoefficient) {
            throw ValidationError(o.inputs[i] + ": stages expects absorption spectra");
        }
        if (parsed.geometry) geom = parsed.geometry;
        records.emplace_back(stage_label_from_string(label_names[i]),
                             std::move(parsed.spectrum));
    }
    const SampleGeometry geometry = geom ? *geom : SampleGeometry(300.0);
    StageComparison cmp = compare_stages(records, geometry, lm.model);
    const OverIrradiationThresholds thresholds{o.gr1_min, o.residual_700_min};
    bool has_irradiated = false;
    for (const auto& s : cmp.stages) has_irradiated |= s.label == StageLabel::Irradiated;

    doc["config"]["model"] = model_echo(lm);
    doc["config"]["gr1_min_cm1_nm"] = thresholds.gr1_min;
    doc["config"]["residual_700_min_cm1"] = thresholds.residual_700_min;
    Json stages = Json::array();
    for (const auto& s : cmp.stages) {
        Json js;
        js["stage"] = to_string(s.label);
        js["band_avg_680_760_cm1"] = s.band_avg_680_760;
        js["gr1_metric_cm1_nm"] = optional_json(s.gr1_metric);
        js["nv_band_metric_cm1_nm"] = optional_json(s.nv_band_metric);
        stages.push_back(js);
    }
    doc["results"]["stages"] = stages;
    Json deltas = Json::array();
    for (const auto& d : cmp.deltas) {
        Json jd;
        jd["from"] = to_string(d.from);
        jd["to"] = to_string(d.to);
        jd["band_avg_delta_cm1"] = d.band_avg_delta;
        jd["gr1_delta_cm1_nm"] = optional_json(d.gr1_delta);
        jd["nv_band_delta_cm1_nm"] = optional_json(d.nv_band_delta);
        deltas.push_back(jd);
    }
    doc["results"]["deltas"] = deltas;
    doc["results"]["anneal_recovered"] = cmp.anneal_recovered;
    doc["results"]["over_irradiated"] =
        has_irradiated ? Json(over_irradiation_flag(cmp, thresholds)) : Json(nullptr);
    write_report(doc, o.out.empty() ? default_report_path(o.inputs.front()) : o.out);
}

// ---- correlate ----

struct CorrelateOpts {
    std::string input;
    bool trend = false;
    bool weighted = false;
    std::string out;
    std::string svg;
    std::string config;
};

void run_correlate(const CorrelateOpts& o) {
    const std::string text = read_text_file(o.input);
    const auto points = parse_correlation_text(text, o.input);

    Json doc = report_skeleton("correlate");
    report_add_input(doc, o.input, text);
    doc["config"]["trend"] = o.trend;
    doc["config"]["weighted"] = o.weighted;
    doc["results"]["n_points"] = points.size();

    if (o.trend) {
        const TrendResult t = monotonic_trend(points);
        doc["results"]["spearman_rho"] = t.spearman_rho;
        doc["results"]["decreasing"] = t.decreasing;
    } else {
        const PowerLawFit fit = power_law_fit(points, o.weighted);
        doc["results"]["a"] = fit.a;
        doc["results"]["b"] = fit.b;
        doc["results"]["r2"] = fit.r2;
        doc["results"]["superlinear"] = superlinear_flag(fit);
    }

    if (!o.svg.empty()) {
        std::vector<double> xs, ys;
        for (const auto& p : points) {
            xs.push_back(p.p1_ppm);
            ys.push_back(p.y);
        }
        std::vector<PlotSeries> series{PlotSeries{"data", xs, ys}};
        PlotConfig pc;
        pc.x_label = "P1 (ppm)";
        pc.y_label = "metric";
        pc.title = o.trend ? "Metric vs P1" : "Power-law fit";
        if (!o.trend) {
            const PowerLawFit fit = power_law_fit(points, o.weighted);
            const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
            PlotSeries line{"fit", {*lo, *hi},
                            {fit.a * std::pow(*lo, fit.b), fit.a * std::pow(*hi, fit.b)}};
            series.push_back(line);
            pc.log_x = true;
            pc.log_y = true;
        }
        write_svg(series, pc, o.svg);
        doc["results"]["svg_out"] = o.svg;
    }
    write_report(doc, o.out.empty() ? default_report_path(o.input) : o.out);
}

// ---- synth ----

// Spectrum spec keys: the model keys plus
//   coefficients = c;c;...   (one per component, required)
//   bumps        = center:fwhm:amplitude;...
//   noise_sigma, seed, thickness_um, r_total
//   output_kind  = transmittance | absorption_cm-1
//   grid         = lo:hi:step
struct SynthSpectrumOpts {
    std::string spec_path;
    std::string out;
    std::string report;
};

void run_synth_spectrum(const SynthSpectrumOpts& o) {
    const std::string text = read_text_file(o.spec_path);
    auto cfg = parse_config_text(text, o.spec_path);

    static const std::vector<std::string> synth_keys = {
        "coefficients", "bumps", "noise_sigma", "seed",
        "thickness_um", "r_total", "output_kind", "grid"};
    std::map<std::string, std::string> model_cfg;
    std::map<std::string, std::string> synth_cfg;
    for (const auto& [k, v] : cfg) {
        if (std::find(synth_keys.begin(), synth_keys.end(), k) != synth_keys.end()) {
            synth_cfg[k] = v;
        } else {
            model_cfg[k] = v;  // model_from_config rejects anything unknown
        }
    }
    LoadedModel lm = model_from_config(model_cfg, o.spec_path);

    SynthSpec spec;
    spec.model = lm.model;
    auto cit = synth_cfg.find("coefficients");
    if (cit == synth_cfg.end()) {
        throw ValidationError(o.spec_path + ": missing required key 'coefficients'");
    }
    for (const auto& c : split_list(cit->second, ';')) {
        auto v = parse_strict_double(c);
        if (!v) {
            throw ValidationError(o.spec_path + ": coefficient '" + c + "' is not a number");
        }
        spec.coefficients.push_back(*v);
    }
    if (auto it = synth_cfg.find("bumps"); it != synth_cfg.end() && !it->second.empty()) {
        for (const auto& item : split_list(it->second, ';')) {
            const auto t = parse_tuple(item, 3, "bump", o.spec_path);
            spec.extra_features.push_back({t[0], t[1], t[2]});
        }
    }
    spec.noise.multiplicative_sigma = double_or(synth_cfg, "noise_sigma", 0.0, o.spec_path);
    if (auto it = synth_cfg.find("seed"); it != synth_cfg.end()) {
        auto v = parse_strict_u64(it->second);
        if (!v) {
            throw ValidationError(o.spec_path + ": seed must be a non-negative integer");
        }
        spec.noise.seed = *v;
    }
    spec.geometry = SampleGeometry(double_or(synth_cfg, "thickness_um", 300.0, o.spec_path));
    spec.reflectance = ReflectanceModel(double_or(synth_cfg, "r_total", 0.2913, o.spec_path));

    std::string output_kind = "transmittance";
    if (auto it = synth_cfg.find("output_kind"); it != synth_cfg.end()) {
        output_kind = it->second;
    }
    if (output_kind != "transmittance" && output_kind != "absorption_cm-1") {
        throw ValidationError(o.spec_path +
                              ": output_kind must be transmittance or absorption_cm-1");
    }

    std::vector<double> grid_def = {220.0, 800.0, 2.0};
    if (auto it = synth_cfg.find("grid"); it != synth_cfg.end()) {
        grid_def = parse_tuple(it->second, 3, "grid", o.spec_path);
    }
    if (!(grid_def[0] < grid_def[1]) || !(grid_def[2] > 0.0)) {
        throw ValidationError(o.spec_path + ": grid needs lo < hi and a positive step");
    }
    std::vector<double> lambdas;
    const auto steps =
        static_cast<std::size_t>(std::floor((grid_def[1] - grid_def[0]) / grid_def[2] + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        lambdas.push_back(grid_def[0] + static_cast<double>(i) * grid_def[2]);
    }
    const WavelengthGrid grid(std::move(lambdas));

    const Spectrum out_spectrum = output_kind == "transmittance"
                                      ? synth_transmittance(spec, grid)
                                      : synth_absorption(spec, grid);
    const std::string emitted =
        spectrum_to_text(out_spectrum, SampleGeometry(spec.geometry.thickness_um));
    write_text_file(o.out, emitted);

    Json doc = report_skeleton("synth spectrum");
    report_add_input(doc, o.spec_path, text);
    doc["config"]["model"] = model_echo(lm);
    doc["config"]["coefficients"] = spec.coefficients;
    Json bumps = Json::array();
    for (const auto& b : spec.extra_features) {
        bumps.push_back(
            {{"center_nm", b.center_nm}, {"fwhm_nm", b.fwhm_nm}, {"amplitude", b.amplitude}});
    }
    doc["config"]["bumps"] = bumps;
    doc["config"]["noise_sigma"] = spec.noise.multiplicative_sigma;
    doc["config"]["seed"] = spec.noise.seed;
    doc["config"]["thickness_um"] = spec.geometry.thickness_um;
    doc["config"]["r_total"] = spec.reflectance.r_total;
    doc["config"]["output_kind"] = output_kind;
    doc["config"]["grid"] = {grid_def[0], grid_def[1], grid_def[2]};
    doc["results"]["output"] = o.out;
    doc["results"]["output_fnv1a64"] = fnv1a64_hex(emitted);
    doc["results"]["n_points"] = out_spectrum.size();
    write_report(doc, o.report.empty() ? default_report_path(o.out) : o.report);
}

// Map spec keys:
//   width, height, pixel_pitch_um, thickness_um, baseline_delta_n,
//   noise_sigma_nm, seed, mask_shape = rectangle | ellipse,
//   blobs = cx:cy:radius:amplitude;...
struct SynthMapOpts {
    std::string spec_path;
    std::string out;
    std::string report;
};

void run_synth_map(const SynthMapOpts& o) {
    const std::string text = read_text_file(o.spec_path);
    auto cfg = parse_config_text(text, o.spec_path);
    static const std::vector<std::string> known = {
        "width",          "height", "pixel_pitch_um", "thickness_um", "baseline_delta_n",
        "noise_sigma_nm", "seed",   "mask_shape",     "blobs"};
    for (const auto& [k, v] : cfg) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw ValidationError(o.spec_path + ": unknown map spec key '" + k + "'");
        }
    }
    MapSynthSpec spec;
    const double w = double_or(cfg, "width", static_cast<double>(spec.width), o.spec_path);
    const double h = double_or(cfg, "height", static_cast<double>(spec.height), o.spec_path);
    if (!(w > 0.0) || w != std::floor(w) || !(h > 0.0) || h != std::floor(h)) {
        throw ValidationError(o.spec_path + ": width and height must be positive integers");
    }
    spec.width = static_cast<std::size_t>(w);
    spec.height = static_cast<std::size_t>(h);
    spec.pixel_pitch_um = double_or(cfg, "pixel_pitch_um", spec.pixel_pitch_um, o.spec_path);
    spec.thickness_um = double_or(cfg, "thickness_um", spec.thickness_um, o.spec_path);
    spec.baseline_delta_n =
        double_or(cfg, "baseline_delta_n", spec.baseline_delta_n, o.spec_path);
    spec.noise_sigma_nm = double_or(cfg, "noise_sigma_nm", spec.noise_sigma_nm, o.spec_path);
    if (auto it = cfg.find("seed"); it != cfg.end()) {
        auto v = parse_strict_u64(it->second);
        if (!v) {
            throw ValidationError(o.spec_path + ": seed must be a non-negative integer");
        }
        spec.seed = *v;
    }
    if (auto it = cfg.find("mask_shape"); it != cfg.end()) {
        if (it->second == "rectangle") {
            spec.mask_shape = MaskShape::Rectangle;
        } else if (it->second == "ellipse") {
            spec.mask_shape = MaskShape::Ellipse;
        } else {
            throw ValidationError(o.spec_path + ": mask_shape must be rectangle or ellipse");
        }
    }
    if (auto it = cfg.find("blobs"); it != cfg.end() && !it->second.empty()) {
        for (const auto& item : split_list(it->second, ';')) {
            const auto t = parse_tuple(item, 4, "blob", o.spec_path);
            spec.blobs.push_back({t[0], t[1], t[2], t[3]});
        }
    }

    std::size_t clamped = 0;
    const RetardationMap map = synth_retardation_map(spec, &clamped);
    const std::string emitted = map_to_text(map);
    write_text_file(o.out, emitted);

    Json doc = report_skeleton("synth map");
    report_add_input(doc, o.spec_path, text);
    doc["config"]["width"] = spec.width;
    doc["config"]["height"] = spec.height;
    doc["config"]["pixel_pitch_um"] = spec.pixel_pitch_um;
    doc["config"]["thickness_um"] = spec.thickness_um;
    doc["config"]["baseline_delta_n"] = spec.baseline_delta_n;
    doc["config"]["noise_sigma_nm"] = spec.noise_sigma_nm;
    doc["config"]["seed"] = spec.seed;
    doc["config"]["mask_shape"] =
        spec.mask_shape == MaskShape::Rectangle ? "rectangle" : "ellipse";
    Json blobs = Json::array();
    for (const auto& b : spec.blobs) {
        blobs.push_back({{"center_x_px", b.center_x_px},
                         {"center_y_px", b.center_y_px},
                         {"radius_px", b.radius_px},
                         {"amplitude", b.amplitude}});
    }
    doc["config"]["blobs"] = blobs;
    doc["results"]["output"] = o.out;
    doc["results"]["output_fnv1a64"] = fnv1a64_hex(emitted);
    doc["results"]["clamped_pixels"] = clamped;
    write_report(doc, o.report.empty() ? default_report_path(o.out) : o.report);
}

// ---- compare-maps ----

struct CompareMapsOpts {
    std::string before;
    std::string after;
    double thickness_um = 0.0;
    std::string out;
    std::string config;
};

void run_compare_maps(const CompareMapsOpts& o) {
    if (o.thickness_um == 0.0) {
        throw ValidationError("missing --thickness-um (set it on the command line or in the config)");
    }
    const std::string before_text = read_text_file(o.before);
    const std::string after_text = read_text_file(o.after);
    const SampleGeometry geom(o.thickness_um);
    const DeltaNMap before = delta_n_map(parse_map_text(before_text, o.before), geom);
    const DeltaNMap after = delta_n_map(parse_map_text(after_text, o.after), geom);
    const MapPairComparison cmp = map_pair_compare(before, after);

    Json doc = report_skeleton("compare-maps");
    report_add_input(doc, o.before, before_text);
    report_add_input(doc, o.after, after_text);
    doc["config"]["thickness_um"] = o.thickness_um;
    doc["results"]["mean_delta"] = cmp.mean_delta;
    doc["results"]["std_delta"] = cmp.std_delta;
    doc["results"]["joint_valid_pixels"] = cmp.joint_valid;
    doc["results"]["reduced"] = cmp.reduced;
    write_report(doc, o.out.empty() ? default_report_path(o.before) : o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NV-diamond optical characterization toolkit"};
    app.require_subcommand(1);

    AbsorbOpts absorb;
    auto* cmd_absorb = app.add_subcommand(
        "absorb", "Convert a transmittance spectrum to absorption and report a band average");
    cmd_absorb->add_option("spectra", absorb.inputs, "transmittance CSVs (one report each)")
        ->required();
    cmd_absorb->add_option("--mode", absorb.mode, "sphere (reflection-corrected) or simple");
    cmd_absorb->add_option("--rt", absorb.rt, "total plate reflectance");
    cmd_absorb->add_option("--band", absorb.band, "band average bounds lo,hi in nm")
        ->delimiter(',')
        ->expected(2);
    cmd_absorb->add_option("-o,--out", absorb.out, "report path (default <input>.report.json)");
    cmd_absorb->add_option("--spectrum-out", absorb.spectrum_out, "write the converted CSV here");
    cmd_absorb->add_option("--svg", absorb.svg, "write a plot here");
    cmd_absorb->add_option("--config", absorb.config, "key=value defaults for this subcommand");

    DecomposeOpts decompose;
    auto* cmd_decompose = app.add_subcommand(
        "decompose", "Fit the five-component model to an absorption spectrum");
    cmd_decompose->add_option("spectra", decompose.inputs, "absorption CSVs (one report each)")
        ->required();
    cmd_decompose->add_option("--model", decompose.model_path, "model config file");
    cmd_decompose->add_flag("--refine", decompose.refine, "nonlinear band-shape refinement");
    cmd_decompose->add_flag("--mask-nv", decompose.mask_nv, "exclude the 400-650 nm NV band");
    auto* kappa_opt = cmd_decompose->add_option(
        "--kappa", decompose.kappa, "P1 calibration factor in ppm per cm^-1 at 270 nm");
    cmd_decompose->add_option("-o,--out", decompose.out, "report path");
    cmd_decompose->add_option("--svg", decompose.svg, "write a plot here");
    cmd_decompose->add_option("--config", decompose.config,
                              "key=value defaults for this subcommand");

    BirefOpts biref;
    auto* cmd_biref = app.add_subcommand(
        "biref", "Birefringence statistics and worst-case loss from a retardation map");
    cmd_biref->add_option("maps", biref.inputs, "retardation map files (one report each)")
        ->required();
    cmd_biref->add_option("--thickness-um", biref.thickness_um, "average plate thickness");
    cmd_biref->add_option("--lambda-nm", biref.lambda_nm, "wavelength for the loss model");
    cmd_biref->add_option("-o,--out", biref.out, "report path");
    cmd_biref->add_option("--config", biref.config, "key=value defaults for this subcommand");

    StagesOpts stages;
    auto* cmd_stages = app.add_subcommand(
        "stages", "Compare absorption spectra across treatment stages");
    cmd_stages->add_option("spectra", stages.inputs, "absorption CSVs in stage order")
        ->required()
        ->expected(-2);
    cmd_stages->add_option("--labels", stages.labels, "comma list: grown,irr,ann");
    cmd_stages->add_option("--model", stages.model_path, "model config file");
    cmd_stages->add_flag("--mask-nv", stages.mask_nv, "exclude the 400-650 nm NV band");
    cmd_stages->add_option("--gr1-min", stages.gr1_min,
                           "GR1 residual threshold for over-irradiation (cm^-1 nm)");
    cmd_stages->add_option("--residual-700-min", stages.residual_700_min,
                           "final band-average excess threshold (cm^-1)");
    cmd_stages->add_option("-o,--out", stages.out, "report path");
    cmd_stages->add_option("--config", stages.config, "key=value defaults for this subcommand");

    CorrelateOpts correlate;
    auto* cmd_correlate = app.add_subcommand(
        "correlate", "Power-law fit or monotonic trend across samples");
    cmd_correlate->add_option("csv", correlate.input, "sample_id,p1_ppm,metric[,metric_err]")
        ->required();
    cmd_correlate->add_flag("--trend", correlate.trend, "Spearman trend instead of the fit");
    cmd_correlate->add_flag("--weighted", correlate.weighted, "1/sigma^2 weights in log space");
    cmd_correlate->add_option("-o,--out", correlate.out, "report path");
    cmd_correlate->add_option("--svg", correlate.svg, "write a plot here");
    cmd_correlate->add_option("--config", correlate.config,
                              "key=value defaults for this subcommand");

    auto* cmd_synth = app.add_subcommand("synth", "Generate synthetic data from a spec file");
    cmd_synth->require_subcommand(1);
    SynthSpectrumOpts synth_spectrum;
    auto* cmd_synth_spectrum = cmd_synth->add_subcommand("spectrum", "synthetic spectrum CSV");
    cmd_synth_spectrum->add_option("spec", synth_spectrum.spec_path, "spec file")->required();
    cmd_synth_spectrum->add_option("-o,--out", synth_spectrum.out, "output CSV")->required();
    cmd_synth_spectrum->add_option("--report", synth_spectrum.report,
                                   "report path (default <out>.report.json)");
    SynthMapOpts synth_map;
    auto* cmd_synth_map = cmd_synth->add_subcommand("map", "synthetic retardation map");
    cmd_synth_map->add_option("spec", synth_map.spec_path, "spec file")->required();
    cmd_synth_map->add_option("-o,--out", synth_map.out, "output map file")->required();
    cmd_synth_map->add_option("--report", synth_map.report, "report path");

    CompareMapsOpts compare_maps;
    auto* cmd_compare = app.add_subcommand(
        "compare-maps", "Before/after birefringence map comparison");
    cmd_compare->add_option("before", compare_maps.before, "map before treatment")->required();
    cmd_compare->add_option("after", compare_maps.after, "map after treatment")->required();
    cmd_compare->add_option("--thickness-um", compare_maps.thickness_um, "plate thickness");
    cmd_compare->add_option("-o,--out", compare_maps.out, "report path");
    cmd_compare->add_option("--config", compare_maps.config,
                            "key=value defaults for this subcommand");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::FileError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (app.got_subcommand(cmd_absorb)) {
            if (!absorb.config.empty()) apply_config(cmd_absorb, absorb.config);
            run_absorb(absorb);
        } else if (app.got_subcommand(cmd_decompose)) {
            if (!decompose.config.empty()) apply_config(cmd_decompose, decompose.config);
            decompose.kappa_set = kappa_opt->count() > 0;
            run_decompose(decompose);
        } else if (app.got_subcommand(cmd_biref)) {
            if (!biref.config.empty()) apply_config(cmd_biref, biref.config);
            run_biref(biref);
        } else if (app.got_subcommand(cmd_stages)) {
            if (!stages.config.empty()) apply_config(cmd_stages, stages.config);
            run_stages(stages);
        } else if (app.got_subcommand(cmd_correlate)) {
            if (!correlate.config.empty()) apply_config(cmd_correlate, correlate.config);
            run_correlate(correlate);
        } else if (app.got_subcommand(cmd_synth)) {
            if (cmd_synth->got_subcommand(cmd_synth_spectrum)) {
                run_synth_spectrum(synth_spectrum);
            } else {
                run_synth_map(synth_map);
            }
        } else if (app.got_subcommand(cmd_compare)) {
            if (!compare_maps.config.empty()) apply_config(cmd_compare, compare_maps.config);
            run_compare_maps(compare_maps);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
