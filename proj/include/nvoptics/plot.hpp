#pragma once

#include <string>
#include <vector>

namespace nvoptics {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotConfig {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width_px = 720;
    int height_px = 480;
};

// Standalone SVG chart with no external references: fixed palette, nice-step
// ticks, one polyline per series (a lone point becomes a marker). All numbers
// go through the shortest round-trip formatter, so equal input gives equal
// bytes. Log axes reject non-positive data.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotConfig& cfg);
void write_svg(const std::vector<PlotSeries>& series, const PlotConfig& cfg,
               const std::string& path);

}  // namespace nvoptics
