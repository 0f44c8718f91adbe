#include "nvoptics/types.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace nvoptics {

double um_to_cm(double thickness_um) {
    if (!(thickness_um > 0.0)) {
        std::ostringstream os;
        os << "thickness must be positive, got " << thickness_um << " um";
        throw ValidationError(os.str());
    }
    return thickness_um * 1e-4;
}

std::string to_string(SpectrumKind kind) {
    return kind == SpectrumKind::Transmittance ? "transmittance" : "absorption_cm-1";
}

namespace {

void append_grid_violations(const std::vector<double>& w, std::vector<std::string>& out) {
    std::ostringstream os;
    if (w.size() < 2) {
        os << "grid too short: need at least 2 wavelengths, got " << w.size();
        out.push_back(os.str());
        return;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
            std::ostringstream o;
            o << "wavelength not positive and finite at index " << i;
            out.push_back(o.str());
        }
        if (i > 0 && !(w[i] > w[i - 1])) {
            std::ostringstream o;
            o << "grid not strictly increasing at index " << i;
            out.push_back(o.str());
        }
    }
}

}  // namespace

std::vector<std::string> validate_spectrum(const std::vector<double>& wavelengths_nm,
                                           const std::vector<double>& values,
                                           SpectrumKind kind, SpectrumRole role) {
    std::vector<std::string> out;
    append_grid_violations(wavelengths_nm, out);
    if (values.size() != wavelengths_nm.size()) {
        std::ostringstream os;
        os << "value count " << values.size() << " does not match grid length "
           << wavelengths_nm.size();
        out.push_back(os.str());
    }
    if (role == SpectrumRole::Residual && kind != SpectrumKind::AbsorptionCoefficient) {
        out.push_back("residual spectra must have kind absorption_cm-1");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            std::ostringstream o;
            o << "value not finite at index " << i;
            out.push_back(o.str());
            continue;
        }
        if (kind == SpectrumKind::Transmittance) {
            if (!(values[i] > 0.0 && values[i] <= 1.0)) {
                std::ostringstream o;
                o << "transmittance out of (0,1] at index " << i;
                out.push_back(o.str());
            }
        } else if (role == SpectrumRole::Measured && values[i] < 0.0) {
            std::ostringstream o;
            o << "negative absorption coefficient at index " << i
              << " (only residual spectra may be negative)";
            out.push_back(o.str());
        }
    }
    return out;
}

WavelengthGrid::WavelengthGrid(std::vector<double> values_nm) : values_(std::move(values_nm)) {
    std::vector<std::string> violations;
    append_grid_violations(values_, violations);
    if (!violations.empty()) {
        throw ValidationError("invalid wavelength grid: " + violations.front());
    }
}

Spectrum::Spectrum(WavelengthGrid grid, std::vector<double> values, SpectrumKind kind,
                   SpectrumRole role)
    : grid_(std::move(grid)), values_(std::move(values)), kind_(kind), role_(role) {
    auto violations = validate_spectrum(grid_.values(), values_, kind_, role_);
    if (!violations.empty()) {
        throw ValidationError("invalid spectrum: " + violations.front());
    }
}

std::vector<std::string> validate_spectrum(const Spectrum& s) {
    return validate_spectrum(s.grid().values(), s.values(), s.kind(), s.role());
}

SampleGeometry::SampleGeometry(double thickness_um_, std::optional<double> lateral_mm_)
    : thickness_um(thickness_um_), lateral_mm(lateral_mm_) {
    if (!(thickness_um >= 1.0 && thickness_um <= 10000.0)) {
        std::ostringstream os;
        os << "thickness_um must lie in [1, 10000], got " << thickness_um;
        throw ValidationError(os.str());
    }
    if (lateral_mm && !(*lateral_mm > 0.0)) {
        throw ValidationError("lateral_mm must be positive when given");
    }
}

std::string to_string(StageLabel label) {
    switch (label) {
        case StageLabel::AsGrown: return "as_grown";
        case StageLabel::Irradiated: return "irradiated";
        case StageLabel::Annealed: return "annealed";
    }
    return "unknown";
}

StageLabel stage_label_from_string(const std::string& name) {
    if (name == "as_grown" || name == "grown") return StageLabel::AsGrown;
    if (name == "irradiated" || name == "irr") return StageLabel::Irradiated;
    if (name == "annealed" || name == "ann") return StageLabel::Annealed;
    throw ValidationError("unknown stage label '" + name +
                          "' (expected grown, irr, or ann)");
}

TreatmentStage::TreatmentStage(StageLabel label_, std::optional<double> energy,
                               std::optional<double> fluence, std::optional<double> temp,
                               std::optional<double> hours)
    : label(label_),
      irradiation_energy_mev(energy),
      fluence_e_per_cm2(fluence),
      anneal_temp_c(temp),
      anneal_hours(hours) {
    if (label == StageLabel::Irradiated && (!energy || !fluence)) {
        throw ValidationError("irradiated stage requires irradiation energy and fluence");
    }
    if (label == StageLabel::Annealed && (!temp || !hours)) {
        throw ValidationError("annealed stage requires anneal temperature and duration");
    }
    if ((energy && !(*energy > 0.0)) || (fluence && !(*fluence > 0.0))) {
        throw ValidationError("irradiation energy and fluence must be positive");
    }
    if ((temp && !(*temp > 0.0)) || (hours && !(*hours > 0.0))) {
        throw ValidationError("anneal temperature and duration must be positive");
    }
}

TreatmentStage TreatmentStage::as_grown() { return TreatmentStage(StageLabel::AsGrown); }

TreatmentStage TreatmentStage::irradiated(double energy_mev, double fluence_e_per_cm2) {
    return TreatmentStage(StageLabel::Irradiated, energy_mev, fluence_e_per_cm2);
}

TreatmentStage TreatmentStage::annealed(double temp_c, double hours) {
    return TreatmentStage(StageLabel::Annealed, std::nullopt, std::nullopt, temp_c, hours);
}

void check_stage_order(const std::vector<StageLabel>& labels) {
    for (std::size_t i = 1; i < labels.size(); ++i) {
        if (static_cast<int>(labels[i]) <= static_cast<int>(labels[i - 1])) {
            throw ValidationError("stage order must follow as_grown -> irradiated -> annealed; '" +
                                  to_string(labels[i]) + "' cannot follow '" +
                                  to_string(labels[i - 1]) + "'");
        }
    }
}

SampleRecord::SampleRecord(std::string id_, SampleGeometry geometry_,
                           std::vector<StageEntry> stages_)
    : id(std::move(id_)), geometry(geometry_), stages(std::move(stages_)) {
    if (id.empty()) throw ValidationError("sample id must not be empty");
    std::vector<StageLabel> labels;
    labels.reserve(stages.size());
    for (const auto& entry : stages) labels.push_back(entry.stage.label);
    check_stage_order(labels);
}

}  // namespace nvoptics
