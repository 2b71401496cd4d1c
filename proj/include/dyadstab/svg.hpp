// Dependency-free SVG emitters for the plots the CLI produces: line charts
// (Nyquist, Bode) and stability heat maps. CSV remains the canonical output;
// these are best-effort visual companions.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace dyadstab {

struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    std::string label;
};

struct SvgMarker {
    double x = 0.0;
    double y = 0.0;
    std::string color = "#d62728";
    std::string label;
};

namespace detail {

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    double pixel_lo = 0.0, pixel_hi = 1.0;

    double map(double v) const {
        const double f = (v - lo) / (hi - lo);
        return pixel_lo + f * (pixel_hi - pixel_lo);
    }
};

inline void expand(double v, double& lo, double& hi) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
}

inline std::string svg_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

/// Render series as polylines with light axes and tick labels.
inline std::string render_line_plot(const std::vector<SvgSeries>& series,
                                    const std::string& title, const std::string& x_label,
                                    const std::string& y_label,
                                    const std::vector<SvgMarker>& markers = {}) {
    const int width = 640, height = 480;
    const double ml = 70, mr = 20, mt = 40, mb = 50;

    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : series) {
        for (double v : s.x) detail::expand(v, xlo, xhi);
        for (double v : s.y) detail::expand(v, ylo, yhi);
    }
    for (const auto& m : markers) {
        detail::expand(m.x, xlo, xhi);
        detail::expand(m.y, ylo, yhi);
    }
    if (!(xhi > xlo)) { xlo -= 1.0; xhi += 1.0; }
    if (!(yhi > ylo)) { ylo -= 1.0; yhi += 1.0; }
    const double xpad = 0.05 * (xhi - xlo), ypad = 0.05 * (yhi - ylo);
    detail::AxisScale xs{xlo - xpad, xhi + xpad, ml, width - mr};
    detail::AxisScale ys{ylo - ypad, yhi + ypad, height - mb, mt};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";

    // Frame and ticks.
    svg << "<rect x='" << ml << "' y='" << mt << "' width='" << (width - ml - mr)
        << "' height='" << (height - mt - mb) << "' fill='none' stroke='#444'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xs.lo + (xs.hi - xs.lo) * i / 4.0;
        const double fy = ys.lo + (ys.hi - ys.lo) * i / 4.0;
        svg << "<text x='" << xs.map(fx) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << detail::svg_number(fx)
            << "</text>\n";
        svg << "<text x='" << ml - 8 << "' y='" << ys.map(fy) + 4
            << "' text-anchor='end' font-size='11'>" << detail::svg_number(fy) << "</text>\n";
    }
    svg << "<text x='" << width / 2 << "' y='" << height - 12
        << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n";
    svg << "<text x='16' y='" << height / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 " << height / 2
        << ")'>" << y_label << "</text>\n";

    for (const auto& s : series) {
        svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.4' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            svg << detail::svg_number(xs.map(s.x[i])) << ',' << detail::svg_number(ys.map(s.y[i]))
                << ' ';
        }
        svg << "'/>\n";
    }
    double legend_y = mt + 16;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        svg << "<text x='" << width - mr - 8 << "' y='" << legend_y
            << "' text-anchor='end' font-size='11' fill='" << s.color << "'>" << s.label
            << "</text>\n";
        legend_y += 14;
    }
    for (const auto& m : markers) {
        svg << "<circle cx='" << xs.map(m.x) << "' cy='" << ys.map(m.y)
            << "' r='4' fill='none' stroke='" << m.color << "' stroke-width='1.6'/>\n";
        if (!m.label.empty())
            svg << "<text x='" << xs.map(m.x) + 8 << "' y='" << ys.map(m.y) - 6
                << "' font-size='11' fill='" << m.color << "'>" << m.label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

/// Heat map over a (k, delay) grid; `values` is row-major with rows indexed
/// by stiffness and columns by delay, each cell in [0, 2] mapping to a
/// stable/marginal/unstable palette.
inline std::string render_heat_map(const std::vector<double>& stiffness,
                                   const std::vector<double>& delays_ms,
                                   const std::vector<int>& cells, const std::string& title) {
    const int width = 640, height = 480;
    const double ml = 80, mr = 30, mt = 50, mb = 60;
    const std::size_t rows = stiffness.size();
    const std::size_t cols = delays_ms.size();

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='"
        << height << "' viewBox='0 0 " << width << " " << height << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='26' text-anchor='middle' font-size='15'>"
        << title << "</text>\n";

    const double cw = (width - ml - mr) / static_cast<double>(cols);
    const double ch = (height - mt - mb) / static_cast<double>(rows);
    const char* palette[3] = {"#4daf4a", "#ffbf00", "#e41a1c"};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const int v = std::clamp(cells[r * cols + c], 0, 2);
            // Row 0 (lowest stiffness) drawn at the bottom.
            const double y = mt + (rows - 1 - r) * ch;
            svg << "<rect x='" << ml + c * cw << "' y='" << y << "' width='" << cw
                << "' height='" << ch << "' fill='" << palette[v]
                << "' stroke='white' stroke-width='1'/>\n";
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        svg << "<text x='" << ml + (c + 0.5) * cw << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='11'>" << detail::svg_number(delays_ms[c])
            << "</text>\n";
    }
    for (std::size_t r = 0; r < rows; ++r) {
        svg << "<text x='" << ml - 8 << "' y='" << mt + (rows - 1 - r + 0.5) * ch + 4
            << "' text-anchor='end' font-size='11'>" << detail::svg_number(stiffness[r])
            << "</text>\n";
    }
    svg << "<text x='" << width / 2 << "' y='" << height - 16
        << "' text-anchor='middle' font-size='12'>delay (ms)</text>\n";
    svg << "<text x='20' y='" << height / 2
        << "' text-anchor='middle' font-size='12' transform='rotate(-90 20 " << height / 2
        << ")'>stiffness (N/m)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace dyadstab
