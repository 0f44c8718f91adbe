#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nvoptics/errors.hpp"

namespace nvoptics {

// Canonical internal units: wavelength nm, thickness cm (stored as um,
// converted on access), absorption coefficient cm^-1, retardation nm,
// delta-n dimensionless. Transmittance is always a fraction in (0, 1];
// percent inputs are normalized once, at parse time.

double um_to_cm(double thickness_um);

enum class SpectrumKind { Transmittance, AbsorptionCoefficient };

// Residual spectra from the component fit may dip below zero; measured
// spectra may not.
enum class SpectrumRole { Measured, Residual };

std::string to_string(SpectrumKind kind);

// Strictly increasing wavelength axis in nm, length >= 2, all values > 0.
class WavelengthGrid {
public:
    explicit WavelengthGrid(std::vector<double> values_nm);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    bool operator==(const WavelengthGrid&) const = default;

private:
    std::vector<double> values_;
};

// Total validation of raw spectrum data. Returns one message per broken
// rule; each message names the offending index. Empty means the data can
// construct a Spectrum with the same kind and role.
std::vector<std::string> validate_spectrum(const std::vector<double>& wavelengths_nm,
                                           const std::vector<double>& values,
                                           SpectrumKind kind,
                                           SpectrumRole role = SpectrumRole::Measured);

// Wavelength-sampled measurement series. Immutable after construction;
// the constructor enforces exactly the rules validate_spectrum checks.
class Spectrum {
public:
    Spectrum(WavelengthGrid grid, std::vector<double> values, SpectrumKind kind,
             SpectrumRole role = SpectrumRole::Measured);

    const WavelengthGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    SpectrumKind kind() const { return kind_; }
    SpectrumRole role() const { return role_; }
    std::size_t size() const { return values_.size(); }

    bool operator==(const Spectrum&) const = default;

private:
    WavelengthGrid grid_;
    std::vector<double> values_;
    SpectrumKind kind_;
    SpectrumRole role_;
};

std::vector<std::string> validate_spectrum(const Spectrum& s);

// Plate geometry. Thickness is the plate average, in micrometers,
// restricted to [1, 10000].
struct SampleGeometry {
    double thickness_um;
    std::optional<double> lateral_mm;

    explicit SampleGeometry(double thickness_um,
                            std::optional<double> lateral_mm = std::nullopt);

    double thickness_cm() const { return um_to_cm(thickness_um); }
    double thickness_nm() const { return thickness_um * 1e3; }
};

enum class StageLabel { AsGrown, Irradiated, Annealed };

std::string to_string(StageLabel label);
StageLabel stage_label_from_string(const std::string& name);

// Treatment-stage provenance. Irradiated requires energy and fluence;
// Annealed requires temperature and duration.
struct TreatmentStage {
    StageLabel label;
    std::optional<double> irradiation_energy_mev;
    std::optional<double> fluence_e_per_cm2;
    std::optional<double> anneal_temp_c;
    std::optional<double> anneal_hours;

    explicit TreatmentStage(StageLabel label,
                            std::optional<double> irradiation_energy_mev = std::nullopt,
                            std::optional<double> fluence_e_per_cm2 = std::nullopt,
                            std::optional<double> anneal_temp_c = std::nullopt,
                            std::optional<double> anneal_hours = std::nullopt);

    static TreatmentStage as_grown();
    static TreatmentStage irradiated(double energy_mev, double fluence_e_per_cm2);
    static TreatmentStage annealed(double temp_c, double hours);
};

struct StageEntry {
    TreatmentStage stage;
    std::vector<std::string> data_files;
};

// Sample identity plus ordered treatment history. Stage labels must form
// a strict subsequence of AsGrown -> Irradiated -> Annealed.
struct SampleRecord {
    std::string id;
    SampleGeometry geometry;
    std::vector<StageEntry> stages;

    SampleRecord(std::string id, SampleGeometry geometry, std::vector<StageEntry> stages);
};

// Throws ValidationError unless labels are strictly ascending in the
// AsGrown < Irradiated < Annealed order.
void check_stage_order(const std::vector<StageLabel>& labels);

}  // namespace nvoptics
