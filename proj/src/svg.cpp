#include "aftershock/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace aftershock::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    bool log = false;

    double map(double v) const {
        const double a = log ? std::log10(v) : v;
        return (a - lo) / (hi - lo);
    }
};

Axis make_axis(std::vector<double> values, bool log) {
    Axis axis;
    axis.log = log;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        const double a = log ? std::log10(v) : v;
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.04 * (hi - lo);
    axis.lo = lo - pad;
    axis.hi = hi + pad;
    return axis;
}

// Round-number tick positions (1, 2, 5 steps; whole decades on log axes).
std::vector<double> ticks(const Axis& axis) {
    std::vector<double> out;
    if (axis.log && axis.hi - axis.lo >= 1.0) {
        const double stride = std::max(1.0, std::ceil((axis.hi - axis.lo) / 6.0));
        for (double e = std::ceil(axis.lo); e <= axis.hi; e += stride) out.push_back(std::pow(10.0, e));
        return out;
    }
    const double lo = axis.log ? std::pow(10.0, axis.lo) : axis.lo;
    const double hi = axis.log ? std::pow(10.0, axis.hi) : axis.hi;
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    const double step = (frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0) * mag;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
        out.push_back(std::abs(v) < 1e-9 * step ? 0.0 : v);
    }
    return out;
}

}  // namespace

std::string render(const Plot& plot) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& s : plot.series) {
        xs.insert(xs.end(), s.x.begin(), s.x.end());
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            const double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            ys.push_back(s.y[i] + e);
            ys.push_back(s.y[i] - e);
            ys.push_back(s.y[i]);
        }
    }
    const Axis ax = make_axis(xs, plot.log_x);
    const Axis ay = make_axis(ys, plot.log_y);
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + ax.map(v) * pw; };
    auto py = [&](double v) { return kTop + (1.0 - ay.map(v)) * ph; };
    auto visible = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0.0) && (!plot.log_y || y > 0.0);
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << escape(plot.title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double v : ticks(ax)) {
        out << "<text x=\"" << num(px(v)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
            << tick_label(v) << "</text>\n";
    }
    for (double v : ticks(ay)) {
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">"
            << tick_label(v) << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
        << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(plot.y_label) << "</text>\n";

    for (std::size_t si = 0; si < plot.series.size(); ++si) {
        const auto& s = plot.series[si];
        const std::size_t ci = s.color >= 0 ? static_cast<std::size_t>(s.color) : si;
        const char* color = kColors[ci % std::size(kColors)];
        if (s.style == Style::points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!visible(s.x[i], s.y[i])) continue;
                if (i < s.yerr.size() && s.yerr[i] > 0.0) {
                    const double lo = s.y[i] - s.yerr[i];
                    const double hi = s.y[i] + s.yerr[i];
                    if (visible(s.x[i], lo) && visible(s.x[i], hi)) {
                        out << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(lo)) << "\" x2=\""
                            << num(px(s.x[i])) << "\" y2=\"" << num(py(hi)) << "\" stroke=\"" << color << "\"/>\n";
                    }
                }
                out << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
                    << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
            }
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
            if (s.style == Style::dashed) out << " stroke-dasharray=\"6,4\"";
            out << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (visible(s.x[i], s.y[i])) out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            }
            out << "\"/>\n";
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(si);
        out << "<rect x=\"" << num(kWidth - kRight + 12) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
            << color << "\"/>\n";
        out << "<text x=\"" << num(kWidth - kRight + 28) << "\" y=\"" << num(ly + 1) << "\">" << escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace aftershock::svg
