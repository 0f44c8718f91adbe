#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nvoptics/types.hpp"

namespace nvoptics {

// Row-major pixel grid with an explicit validity mask. Invalid pixels mark
// locations outside the sample; zero is a legitimate measured value, so it
// never doubles as a sentinel.
//
// RetardationMap holds optical retardation in nm, DeltaNMap dimensionless
// birefringence. Both require every valid pixel to be finite and
// non-negative and at least one pixel to be valid.

class RetardationMap {
 public:
    RetardationMap(std::size_t width, std::size_t height, double pixel_pitch_um,
                   std::vector<double> values_nm, std::vector<std::uint8_t> mask);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    double pixel_pitch_um() const { return pitch_um_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::size_t valid_count() const { return valid_count_; }

 private:
    std::size_t width_, height_;
    double pitch_um_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
    std::size_t valid_count_;
};

class DeltaNMap {
 public:
    DeltaNMap(std::size_t width, std::size_t height, double pixel_pitch_um,
              std::vector<double> values, std::vector<std::uint8_t> mask);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    double pixel_pitch_um() const { return pitch_um_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    std::size_t valid_count() const { return valid_count_; }

 private:
    std::size_t width_, height_;
    double pitch_um_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
    std::size_t valid_count_;
};

// Per-pixel worst-case polarization loss fractions; same grid conventions.
struct LossMap {
    std::size_t width = 0, height = 0;
    double pixel_pitch_um = 0.0;
    std::vector<double> values;
    std::vector<std::uint8_t> mask;
};

struct MapStats {
    double mean = 0.0;
    double std_dev = 0.0;  // population normalization
    double min = 0.0;
    double max = 0.0;
    double valid_fraction = 0.0;
};

// Birefringence from retardation: per pixel delta-n = Gamma / d with both in
// nm; d is the plate's average thickness.
DeltaNMap delta_n_map(const RetardationMap& m, const SampleGeometry& geom);

// Statistics over valid pixels only.
MapStats map_stats(const DeltaNMap& m);

// Strictly below the 1e-5 mean threshold.
bool classify_ultra_low(const MapStats& stats);

// Worst-case single-pass light-intensity loss sin^2(pi * delta_n * d / lambda)
// at the worst relative axis orientation, counting all depolarized light as
// lost. An upper bound by construction.
double worst_case_loss(double delta_n, double thickness_cm, double lambda_nm);

LossMap loss_map(const DeltaNMap& m, const SampleGeometry& geom, double lambda_nm);

}  // namespace nvoptics
