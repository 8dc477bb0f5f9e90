#include "phasorsec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace phasorsec {

namespace {

constexpr double kW = 720, kH = 440;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

// "nice" step for about n ticks
double nice_step(double span, int n) {
    const double raw = span / n;
    const double p = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / p;
    return (f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10) * p;
}

}  // namespace

std::string line_chart(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double ystep = nice_step(y1 - y0, 6);
    y0 = std::floor(y0 / ystep) * ystep;
    y1 = std::ceil(y1 / ystep) * ystep;
    const double xstep = nice_step(x1 - x0, 8);

    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!spec.provenance.empty()) os << "<!-- " << escape(spec.provenance) << " -->\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
       << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(spec.title) << "</text>\n";

    // grid and ticks
    for (double y = y0; y <= y1 + ystep * 1e-9; y += ystep) {
        os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(y)) << "\" x2=\"" << num(kLeft + pw)
           << "\" y2=\"" << num(py(y)) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(y) + 4)
           << "\" text-anchor=\"end\">" << tick_label(y) << "</text>\n";
    }
    for (double x = std::ceil(x0 / xstep) * xstep; x <= x1 + xstep * 1e-9; x += xstep) {
        os << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px(x))
           << "\" y2=\"" << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(px(x)) << "\" y=\"" << num(kTop + ph + 19)
           << "\" text-anchor=\"middle\">" << tick_label(x) << "</text>\n";
    }
    os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kH - 12)
       << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << num(kTop + ph / 2)
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (i) os << ' ';
            os << num(px(s.x[i])) << ',' << num(py(s.y[i]));
        }
        os << "\"/>\n";
        if (spec.markers)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
                os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
                   << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
        const double ly = kTop + 12 + 18.0 * static_cast<double>(k);
        os << "<line x1=\"" << num(kLeft + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
           << num(kLeft + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(kLeft + pw + 38) << "\" y=\"" << num(ly + 4) << "\">"
           << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace phasorsec
