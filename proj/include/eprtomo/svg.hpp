// Copyright 2026 The eprtomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Static SVG charts: density overlays, a Wigner heat map with a p = 0
// slice, and a photon-number bar chart.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "eprtomo/conditioning.hpp"
#include "eprtomo/text.hpp"
#include "eprtomo/tomography.hpp"

namespace eprtomo::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    double stroke_width = 1.5;
    double opacity = 1.0;
};

namespace detail {

inline constexpr double kWidth = 640, kHeight = 420, kLeft = 60, kRight = 20, kTop = 30, kBottom = 45;

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

inline std::string num(double v) { return text::format(v, 6); }

inline void open(std::ostream &os, const std::string &title, double width = kWidth, double height = kHeight) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(width / 2) << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n";
}

inline void axes(std::ostream &os, const Frame &f, const std::string &xlabel, const std::string &ylabel) {
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
       << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(kHeight - kBottom + 15)
           << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
        os << "<text x=\"" << num(kLeft - 5) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">"
           << text::format(yv, 3) << "</text>\n";
    }
    os << "<text x=\"" << num(kLeft + (kWidth - kLeft - kRight) / 2) << "\" y=\"" << num(kHeight - 8)
       << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(kTop + (kHeight - kTop - kBottom) / 2) << "\" transform=\"rotate(-90 14 "
       << num(kTop + (kHeight - kTop - kBottom) / 2) << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    if (f.y0 < 0 && f.y1 > 0)
        os << "<line x1=\"" << kLeft << "\" x2=\"" << kWidth - kRight << "\" y1=\"" << num(f.py(0)) << "\" y2=\""
           << num(f.py(0)) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
}

inline void polyline(std::ostream &os, const Frame &f, const Series &s) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << num(s.stroke_width)
       << "\" stroke-opacity=\"" << num(s.opacity) << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
    os << "\"/>\n";
}

inline Frame fit(std::span<const Series> series, bool include_zero) {
    Frame f{1e300, -1e300, include_zero ? 0.0 : 1e300, include_zero ? 0.0 : -1e300};
    for (const auto &s : series) {
        for (double x : s.x) f.x0 = std::min(f.x0, x), f.x1 = std::max(f.x1, x);
        for (double y : s.y) f.y0 = std::min(f.y0, y), f.y1 = std::max(f.y1, y);
    }
    if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1;
    if (!(f.y1 > f.y0)) f.y1 = f.y0 + 1;
    const double pad = 0.05 * (f.y1 - f.y0);
    f.y1 += pad;
    if (f.y0 < 0) f.y0 -= pad;
    return f;
}

/// Diverging blue/white/red scale on [-1, 1].
inline std::string diverging(double t) {
    t = std::clamp(t, -1.0, 1.0);
    int r, g, b;
    if (t >= 0) {
        r = 255;
        g = b = static_cast<int>(std::lround(255 * (1 - t)));
    } else {
        b = 255;
        r = g = static_cast<int>(std::lround(255 * (1 + t)));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace detail

/// Line chart of several series sharing one frame; later series draw on top.
inline void line_chart(std::ostream &os, std::span<const Series> series, const std::string &title,
                       const std::string &xlabel, const std::string &ylabel) {
    const detail::Frame f = detail::fit(series, true);
    detail::open(os, title);
    detail::axes(os, f, xlabel, ylabel);
    for (const auto &s : series) detail::polyline(os, f, s);
    os << "</svg>\n";
}

inline Series density_series(const SampledDensity &d) {
    Series s;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        s.x.push_back(d.center(i));
        s.y.push_back(d.values[i]);
    }
    return s;
}

/// Per-segment conditioned densities as thin grey lines under the pooled
/// density.
inline void histogram_overlay(std::ostream &os, std::span<const SampledDensity> segments,
                              const SampledDensity &pooled, const std::string &title) {
    std::vector<Series> all;
    for (const auto &d : segments) {
        Series s = density_series(d);
        s.color = "#888888";
        s.stroke_width = 0.6;
        s.opacity = 0.5;
        all.push_back(std::move(s));
    }
    Series p = density_series(pooled);
    p.color = "#d62728";
    p.stroke_width = 2.0;
    all.push_back(std::move(p));
    line_chart(os, all, title, "q_a", "probability density");
}

/// Heat map of the Wigner grid (left) and its p = 0 slice (right).
inline void wigner_plot(std::ostream &os, const WignerGrid &w, const std::string &title) {
    const double total_w = 2 * detail::kWidth;
    detail::open(os, title, total_w, detail::kHeight);
    double vmax = 0;
    for (double v : w.values) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0) vmax = 1;

    const double side = detail::kHeight - detail::kTop - detail::kBottom;
    const double x0 = detail::kLeft, y0 = detail::kTop;
    const double cw = side / static_cast<double>(w.x_axis.points);
    const double ch = side / static_cast<double>(w.p_axis.points);
    for (std::size_t ip = 0; ip < w.p_axis.points; ++ip) {
        for (std::size_t ix = 0; ix < w.x_axis.points; ++ix) {
            os << "<rect x=\"" << detail::num(x0 + ix * cw) << "\" y=\""
               << detail::num(y0 + (w.p_axis.points - 1 - ip) * ch) << "\" width=\"" << detail::num(cw + 0.05)
               << "\" height=\"" << detail::num(ch + 0.05) << "\" fill=\"" << detail::diverging(w.at(ix, ip) / vmax)
               << "\"/>\n";
        }
    }
    os << "<rect x=\"" << detail::num(x0) << "\" y=\"" << detail::num(y0) << "\" width=\"" << detail::num(side)
       << "\" height=\"" << detail::num(side) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << detail::num(x0 + side / 2) << "\" y=\"" << detail::num(detail::kHeight - 8)
       << "\" text-anchor=\"middle\">x (" << detail::num(w.x_axis.lo) << " .. " << detail::num(w.x_axis.hi)
       << "), colour scale +/-" << detail::num(vmax) << "</text>\n";

    Series slice;
    for (std::size_t ix = 0; ix < w.x_axis.points; ++ix) {
        slice.x.push_back(w.x_axis.at(ix));
        slice.y.push_back(w.sample(w.x_axis.at(ix), 0.0));
    }
    std::vector<Series> one{slice};
    const detail::Frame f = detail::fit(one, true);
    os << "<g transform=\"translate(" << detail::num(detail::kWidth) << ",0)\">\n";
    detail::axes(os, f, "x (p = 0)", "W(x, 0)");
    detail::polyline(os, f, slice);
    os << "</g>\n</svg>\n";
}

/// Bars of the measured diagonal, optionally with corrected values beside
/// them.
inline void fock_bar_chart(std::ostream &os, const FockDiagonal &d, const std::string &title,
                           const FockDiagonal *corrected = nullptr) {
    const std::size_t n = d.probabilities.size();
    double lo = 0, hi = 0;
    for (double p : d.probabilities) lo = std::min(lo, p), hi = std::max(hi, p);
    if (corrected)
        for (double p : corrected->probabilities) lo = std::min(lo, p), hi = std::max(hi, p);
    hi = std::max(hi, 1e-9) * 1.05;
    if (lo < 0) lo *= 1.05;
    const detail::Frame f{-0.5, static_cast<double>(n) - 0.5, lo, hi};
    detail::open(os, title);
    detail::axes(os, f, "n", "rho_nn");
    const double unit = f.px(1) - f.px(0);
    auto bar = [&](double center, double value, const char *color) {
        const double top = f.py(std::max(0.0, value));
        const double bottom = f.py(std::min(0.0, value));
        os << "<rect x=\"" << detail::num(f.px(center) - 0.18 * unit) << "\" y=\"" << detail::num(top)
           << "\" width=\"" << detail::num(0.36 * unit) << "\" height=\"" << detail::num(bottom - top)
           << "\" fill=\"" << color << "\"/>\n";
    };
    for (std::size_t k = 0; k < n; ++k) {
        const double c = static_cast<double>(k);
        bar(corrected ? c - 0.2 : c, d.probabilities[k], "#1f77b4");
        if (corrected) bar(c + 0.2, corrected->probabilities[k], "#aaaaaa");
    }
    os << "</svg>\n";
}

}  // namespace eprtomo::svg
