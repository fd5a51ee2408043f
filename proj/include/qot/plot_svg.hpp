#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "qot/errors.hpp"

namespace qot::plot {

struct Series {
    std::string name;
    std::vector<double> xs;
    std::vector<double> ys;
    std::string color = "#1f6fb2";
};

namespace detail {

constexpr double kW = 760.0, kH = 560.0;
constexpr double kL = 86.0, kR = 30.0, kT = 52.0, kB = 68.0;

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double to_unit(double v) const {
        double t = log ? std::log10(v) : v;
        return (t - lo) / (hi - lo);
    }
    std::vector<double> ticks() const {
        std::vector<double> out;
        if (log) {
            for (int e = static_cast<int>(std::ceil(lo - 1e-9));
                 e <= static_cast<int>(std::floor(hi + 1e-9)); ++e)
                out.push_back(std::pow(10.0, e));
        } else {
            for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
        }
        return out;
    }
};

inline Axis fit_axis(const std::vector<const std::vector<double>*>& cols, bool log) {
    Axis ax;
    ax.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* col : cols)
        for (double v : *col) {
            if (!std::isfinite(v) || (log && !(v > 0.0))) continue;
            double t = log ? std::log10(v) : v;
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    double pad = (hi - lo) * 0.06;
    if (pad <= 0.0) pad = log ? 0.5 : (std::abs(lo) * 0.1 + 0.5);
    ax.lo = lo - pad;
    ax.hi = hi + pad;
    return ax;
}

inline double px(const Axis& ax, double v) { return kL + ax.to_unit(v) * (kW - kL - kR); }
inline double py(const Axis& ax, double v) { return kH - kB - ax.to_unit(v) * (kH - kT - kB); }

inline void open_svg(std::ofstream& out, const std::string& path, const std::string& title,
                     const std::string& header_comment) {
    out.open(path);
    if (!out) throw ConfigError("plot: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\" font-family=\"sans-serif\">\n";
    out << "<!-- " << header_comment << " -->\n";
    out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\">" << title
        << "</text>\n";
}

inline void draw_axes(std::ofstream& out, const Axis& xa, const Axis& ya,
                      const std::string& xlabel, const std::string& ylabel) {
    out << "<rect x=\"" << kL << "\" y=\"" << kT << "\" width=\"" << kW - kL - kR << "\" height=\""
        << kH - kT - kB << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : xa.ticks()) {
        double x = px(xa, t);
        if (x < kL - 0.5 || x > kW - kR + 0.5) continue;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << kH - kB << "\" x2=\"" << num(x)
            << "\" y2=\"" << kH - kB + 6 << "\" stroke=\"#444\"/>\n";
        out << "<line x1=\"" << num(x) << "\" y1=\"" << kT << "\" x2=\"" << num(x) << "\" y2=\""
            << kH - kB << "\" stroke=\"#eee\"/>\n";
        out << "<text x=\"" << num(x) << "\" y=\"" << kH - kB + 22
            << "\" text-anchor=\"middle\" font-size=\"12\">" << label(t) << "</text>\n";
    }
    for (double t : ya.ticks()) {
        double y = py(ya, t);
        if (y < kT - 0.5 || y > kH - kB + 0.5) continue;
        out << "<line x1=\"" << kL - 6 << "\" y1=\"" << num(y) << "\" x2=\"" << kL << "\" y2=\""
            << num(y) << "\" stroke=\"#444\"/>\n";
        out << "<line x1=\"" << kL << "\" y1=\"" << num(y) << "\" x2=\"" << kW - kR << "\" y2=\""
            << num(y) << "\" stroke=\"#eee\"/>\n";
        out << "<text x=\"" << kL - 10 << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\" font-size=\"12\">" << label(t) << "</text>\n";
    }
    out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 16
        << "\" text-anchor=\"middle\" font-size=\"14\">" << xlabel << "</text>\n";
    out << "<text x=\"22\" y=\"" << (kT + kH - kB) / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 22 "
        << (kT + kH - kB) / 2 << ")\">" << ylabel << "</text>\n";
}

}  // namespace detail

inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& xlabel, const std::string& ylabel,
                            const std::vector<Series>& series, bool logx, bool logy,
                            const std::string& header_comment) {
    std::vector<const std::vector<double>*> xcols, ycols;
    for (const Series& s : series) {
        xcols.push_back(&s.xs);
        ycols.push_back(&s.ys);
    }
    detail::Axis xa = detail::fit_axis(xcols, logx);
    detail::Axis ya = detail::fit_axis(ycols, logy);

    std::ofstream out;
    detail::open_svg(out, path, title, header_comment);
    detail::draw_axes(out, xa, ya, xlabel, ylabel);
    for (const Series& s : series) {
        std::string pts;
        for (std::size_t k = 0; k < s.xs.size(); ++k) {
            if (logx && !(s.xs[k] > 0.0)) continue;
            if (logy && !(s.ys[k] > 0.0)) continue;
            pts += detail::num(detail::px(xa, s.xs[k])) + "," +
                   detail::num(detail::py(ya, s.ys[k])) + " ";
        }
        out << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        for (std::size_t k = 0; k < s.xs.size(); ++k) {
            if (logx && !(s.xs[k] > 0.0)) continue;
            if (logy && !(s.ys[k] > 0.0)) continue;
            out << "<circle cx=\"" << detail::num(detail::px(xa, s.xs[k])) << "\" cy=\""
                << detail::num(detail::py(ya, s.ys[k])) << "\" r=\"3\" fill=\"" << s.color
                << "\"/>\n";
        }
    }
    double ly = detail::kT + 16;
    for (const Series& s : series) {
        double lx = detail::kW - detail::kR - 190;
        out << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 26 << "\" y2=\""
            << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << lx + 32 << "\" y=\"" << ly << "\" font-size=\"12\">" << s.name
            << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
}

struct HeatPoint {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;
};

// Support heatmap: points are binned (max value per bin) so the file stays small at any
// instance size.
inline void write_heatmap(const std::string& path, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel,
                          const std::vector<HeatPoint>& pts, const std::string& header_comment) {
    if (pts.empty()) throw ConfigError("plot: empty heatmap data");
    double xlo = pts[0].x, xhi = pts[0].x, ylo = pts[0].y, yhi = pts[0].y, vmax = 0.0;
    for (const HeatPoint& p : pts) {
        xlo = std::min(xlo, p.x);
        xhi = std::max(xhi, p.x);
        ylo = std::min(ylo, p.y);
        yhi = std::max(yhi, p.y);
        vmax = std::max(vmax, p.v);
    }
    if (!(xhi > xlo)) xhi = xlo + 1.0;
    if (!(yhi > ylo)) yhi = ylo + 1.0;
    if (!(vmax > 0.0)) vmax = 1.0;

    const int nb = 160;
    std::vector<double> bins(static_cast<std::size_t>(nb) * nb, 0.0);
    for (const HeatPoint& p : pts) {
        int ix = std::min(nb - 1, static_cast<int>((p.x - xlo) / (xhi - xlo) * nb));
        int iy = std::min(nb - 1, static_cast<int>((p.y - ylo) / (yhi - ylo) * nb));
        double& cell = bins[static_cast<std::size_t>(iy) * nb + ix];
        cell = std::max(cell, p.v);
    }

    detail::Axis xa{xlo, xhi, false}, ya{ylo, yhi, false};
    std::ofstream out;
    detail::open_svg(out, path, title, header_comment);
    const double cw = (detail::kW - detail::kL - detail::kR) / nb;
    const double ch = (detail::kH - detail::kT - detail::kB) / nb;
    for (int iy = 0; iy < nb; ++iy)
        for (int ix = 0; ix < nb; ++ix) {
            double v = bins[static_cast<std::size_t>(iy) * nb + ix];
            if (v <= 0.0) continue;
            int shade = static_cast<int>(235.0 * (1.0 - std::min(1.0, v / vmax)));
            double x = detail::kL + ix * cw;
            double y = detail::kH - detail::kB - (iy + 1) * ch;
            out << "<rect x=\"" << detail::num(x) << "\" y=\"" << detail::num(y) << "\" width=\""
                << detail::num(cw + 0.3) << "\" height=\"" << detail::num(ch + 0.3)
                << "\" fill=\"rgb(" << shade << "," << shade << ",255)\"/>\n";
        }
    detail::draw_axes(out, xa, ya, xlabel, ylabel);
    out << "</svg>\n";
}

}  // namespace qot::plot
