#include "nvoptics/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nvoptics/errors.hpp"
#include "nvoptics/io.hpp"

namespace nvoptics {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// Centipixel rounding keeps the files small without hurting determinism.
std::string px(double v) {
    const double r = std::round(v * 100.0) / 100.0;
    return format_double(r == 0.0 ? 0.0 : r);
}

std::vector<double> linear_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag * 10.0;
    for (double m : {1.0, 2.0, 5.0}) {
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
        ticks.push_back(t == 0.0 ? 0.0 : t);
    }
    return ticks;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double transform(double v) const { return log ? std::log10(v) : v; }
    double fraction(double v) const { return (transform(v) - lo) / (hi - lo); }
};

Axis make_axis(std::vector<double> values, bool log, const char* name) {
    Axis ax;
    ax.log = log;
    for (double& v : values) {
        if (log && !(v > 0.0)) {
            throw ValidationError(std::string("log ") + name +
                                  " axis requires strictly positive values");
        }
        v = log ? std::log10(v) : v;
    }
    ax.lo = *std::min_element(values.begin(), values.end());
    ax.hi = *std::max_element(values.begin(), values.end());
    if (ax.lo == ax.hi) {
        const double pad = std::max(0.5, std::abs(ax.lo) * 0.05);
        ax.lo -= pad;
        ax.hi += pad;
    } else {
        const double pad = 0.05 * (ax.hi - ax.lo);
        ax.lo -= pad;
        ax.hi += pad;
    }
    return ax;
}

std::vector<double> axis_ticks(const Axis& ax) {
    if (ax.log) {
        std::vector<double> decades;
        for (double d = std::ceil(ax.lo); d <= ax.hi; d += 1.0) {
            decades.push_back(d == 0.0 ? 0.0 : d);
        }
        if (decades.size() >= 2) return decades;
    }
    return linear_ticks(ax.lo, ax.hi);
}

std::string tick_label(const Axis& ax, double t) {
    return format_double(ax.log ? std::pow(10.0, t) : t);
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotConfig& cfg) {
    if (series.empty()) {
        throw ValidationError("plot needs at least one series");
    }
    std::vector<double> all_x, all_y;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw ValidationError("series '" + s.label + "' has mismatched x/y lengths");
        }
        if (s.x.empty()) {
            throw ValidationError("series '" + s.label + "' is empty");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                throw ValidationError("series '" + s.label + "' has a non-finite point");
            }
        }
        all_x.insert(all_x.end(), s.x.begin(), s.x.end());
        all_y.insert(all_y.end(), s.y.begin(), s.y.end());
    }
    const Axis xa = make_axis(all_x, cfg.log_x, "x");
    const Axis ya = make_axis(all_y, cfg.log_y, "y");

    const double W = cfg.width_px, H = cfg.height_px;
    const double ml = 72, mr = 18, mt = cfg.title.empty() ? 18 : 34, mb = 48;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto X = [&](double v) { return ml + xa.fraction(v) * pw; };
    auto Y = [&](double v) { return mt + (1.0 - ya.fraction(v)) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cfg.width_px
        << "\" height=\"" << cfg.height_px << "\" viewBox=\"0 0 " << cfg.width_px << ' '
        << cfg.height_px << "\">\n";
    svg << "<rect width=\"" << cfg.width_px << "\" height=\"" << cfg.height_px
        << "\" fill=\"#ffffff\"/>\n";
    if (!cfg.title.empty()) {
        svg << "<text x=\"" << px(W / 2) << "\" y=\"20\" text-anchor=\"middle\" "
               "font-family=\"sans-serif\" font-size=\"14\" fill=\"#111111\">"
            << escape_xml(cfg.title) << "</text>\n";
    }

    for (double t : axis_ticks(xa)) {
        const double gx = ml + (t - xa.lo) / (xa.hi - xa.lo) * pw;
        svg << "<line x1=\"" << px(gx) << "\" y1=\"" << px(mt) << "\" x2=\"" << px(gx)
            << "\" y2=\"" << px(mt + ph) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << px(gx) << "\" y=\"" << px(mt + ph + 16)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#333333\">"
            << escape_xml(tick_label(xa, t)) << "</text>\n";
    }
    for (double t : axis_ticks(ya)) {
        const double gy = mt + (1.0 - (t - ya.lo) / (ya.hi - ya.lo)) * ph;
        svg << "<line x1=\"" << px(ml) << "\" y1=\"" << px(gy) << "\" x2=\"" << px(ml + pw)
            << "\" y2=\"" << px(gy) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << px(ml - 6) << "\" y=\"" << px(gy + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" "
               "fill=\"#333333\">"
            << escape_xml(tick_label(ya, t)) << "</text>\n";
    }
    svg << "<rect x=\"" << px(ml) << "\" y=\"" << px(mt) << "\" width=\"" << px(pw)
        << "\" height=\"" << px(ph)
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % kPaletteSize];
        if (s.x.size() == 1) {
            svg << "<circle cx=\"" << px(X(s.x[0])) << "\" cy=\"" << px(Y(s.y[0]))
                << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i) svg << ' ';
                svg << px(X(s.x[i])) << ',' << px(Y(s.y[i]));
            }
            svg << "\"/>\n";
        }
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        if (series[si].label.empty()) continue;
        const double ly = mt + 14 + 16 * static_cast<double>(si);
        svg << "<line x1=\"" << px(ml + pw - 130) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
            << px(ml + pw - 112) << "\" y2=\"" << px(ly - 4) << "\" stroke=\""
            << kPalette[si % kPaletteSize] << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << px(ml + pw - 106) << "\" y=\"" << px(ly)
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">"
            << escape_xml(series[si].label) << "</text>\n";
    }

    if (!cfg.x_label.empty()) {
        svg << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(H - 12)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#111111\">"
            << escape_xml(cfg.x_label) << "</text>\n";
    }
    if (!cfg.y_label.empty()) {
        svg << "<text x=\"16\" y=\"" << px(mt + ph / 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
               "fill=\"#111111\" transform=\"rotate(-90 16 "
            << px(mt + ph / 2) << ")\">" << escape_xml(cfg.y_label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_svg(const std::vector<PlotSeries>& series, const PlotConfig& cfg,
               const std::string& path) {
    write_text_file(path, render_svg(series, cfg));
}

}  // namespace nvoptics
