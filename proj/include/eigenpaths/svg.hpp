#pragma once

// Self-contained SVG line plots of eigenpath projections: Re(lambda) or
// Im(lambda) against alpha, one colour per path index, with cluster markers
// and optional dashed overlays.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace eigenpaths::svg {

struct Series {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
    double width = 1.5;
    std::string label;
};

struct Marker {
    double x = 0.0, y = 0.0;
    std::string label;
};

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
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

/// 1, 2 or 5 times a power of ten, giving about `target` intervals on span.
inline double tick_step(double span, int target = 6) {
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    return mag * (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0);
}

}  // namespace detail

struct Plot {
    std::string title, xlabel = "alpha", ylabel;
    std::vector<Series> series;
    std::vector<Marker> markers;

    std::string render(int width = 760, int height = 480) const {
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        auto extend = [&](double x, double y) {
            if (!std::isfinite(x) || !std::isfinite(y)) return;
            x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
        };
        for (const auto& s : series)
            for (std::size_t k = 0; k < s.x.size(); ++k) extend(s.x[k], s.y[k]);
        for (const auto& m : markers) extend(m.x, m.y);
        if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
        if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
        if (y1 - y0 < 1e-12 * (1.0 + std::abs(y0))) {
            const double h = std::max(0.5, 0.5 * std::abs(y0));
            y0 -= h, y1 += h;
        }
        const double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
        x0 -= px, x1 += px, y0 -= py, y1 += py;

        const double left = 70, right = 20, top = 40, bottom = 50;
        const double pw = width - left - right, ph = height - top - bottom;
        auto mx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
        auto my = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };
        using detail::num;

        std::ostringstream o;
        o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
          << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        o << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
          << detail::escape(title) << "</text>\n";
        o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
          << "\" fill=\"none\" stroke=\"black\"/>\n";
        const double xs = detail::tick_step(x1 - x0), ys = detail::tick_step(y1 - y0);
        for (double t = std::ceil(x0 / xs) * xs; t <= x1; t += xs) {
            const double v = std::abs(t) < 1e-12 * xs ? 0.0 : t;
            o << "<line x1=\"" << num(mx(v)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(mx(v)) << "\" y2=\""
              << num(top + ph + 5) << "\" stroke=\"black\"/>"
              << "<text x=\"" << num(mx(v)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << num(v)
              << "</text>\n";
        }
        for (double t = std::ceil(y0 / ys) * ys; t <= y1; t += ys) {
            const double v = std::abs(t) < 1e-12 * ys ? 0.0 : t;
            o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(my(v)) << "\" x2=\"" << num(left) << "\" y2=\""
              << num(my(v)) << "\" stroke=\"black\"/>"
              << "<text x=\"" << num(left - 8) << "\" y=\"" << num(my(v) + 4) << "\" text-anchor=\"end\">" << num(v)
              << "</text>\n";
        }
        o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 10) << "\" text-anchor=\"middle\">"
          << detail::escape(xlabel) << "</text>\n";
        o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
          << detail::escape(ylabel) << "</text>\n";
        for (const auto& s : series) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << num(s.width) << "\"";
            if (s.dashed) o << " stroke-dasharray=\"6 4\"";
            o << " points=\"";
            for (std::size_t k = 0; k < s.x.size(); ++k) o << (k ? " " : "") << num(mx(s.x[k])) << "," << num(my(s.y[k]));
            o << "\">";
            if (!s.label.empty()) o << "<title>" << detail::escape(s.label) << "</title>";
            o << "</polyline>\n";
        }
        for (const auto& m : markers) {
            o << "<circle class=\"ambiguity\" cx=\"" << num(mx(m.x)) << "\" cy=\"" << num(my(m.y))
              << "\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\">";
            if (!m.label.empty()) o << "<title>" << detail::escape(m.label) << "</title>";
            o << "</circle>\n";
        }
        o << "</svg>\n";
        return o.str();
    }
};

/// One series per path: real parts (imag = false) or imaginary parts.
inline std::vector<Series> path_series(const EigenPathSet& s, bool imag, bool dashed = false,
                                       const std::string& prefix = "path ") {
    std::vector<Series> out;
    for (std::size_t j = 0; j < s.size(); ++j) {
        Series line;
        line.x = s.grid;
        for (Complex z : s.paths[j]) line.y.push_back(imag ? z.imag() : z.real());
        line.color = palette(j);
        line.dashed = dashed;
        line.width = dashed ? 1.2 : 1.6;
        line.label = prefix + std::to_string(j);
        out.push_back(std::move(line));
    }
    return out;
}

inline std::vector<Marker> ambiguity_markers(const AmbiguityReport& r, bool imag) {
    std::vector<Marker> out;
    for (const auto& a : r.ambiguities)
        out.push_back({a.alpha, imag ? a.lambda.imag() : a.lambda.real(),
                       "multiplicity " + std::to_string(a.multiplicity) + " at alpha=" + detail::num(a.alpha)});
    return out;
}

inline Plot eigenpath_plot(const EigenPathSet& s, const AmbiguityReport* report, bool imag, const std::string& title) {
    Plot p;
    p.title = title;
    p.ylabel = imag ? "Im(lambda)" : "Re(lambda)";
    p.series = path_series(s, imag);
    if (report) p.markers = ambiguity_markers(*report, imag);
    return p;
}

}  // namespace eigenpaths::svg
