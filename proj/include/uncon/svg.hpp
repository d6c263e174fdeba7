#ifndef UNCON_SVG_HPP
#define UNCON_SVG_HPP

// Minimal standalone SVG line chart of a booking curve in cumulative space:
// the actual curve, one line per method over the censored window, and a
// vertical rule where censoring starts.

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "uncon/curves.hpp"

namespace uncon {

struct SeriesForecast {
    std::string method;
    std::vector<double> cumulative;  // aligned to the censored window
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    return colors[i % 8];
}

}  // namespace detail

struct PlotRange {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
};

// Axis ranges covering every plotted series. x is the day index.
inline PlotRange plot_range(const BookingCurve& actual, const std::vector<SeriesForecast>& forecasts) {
    PlotRange r;
    r.x_max = std::max(1, actual.horizon() - 1);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int v : actual.cumulative()) {
        lo = std::min(lo, static_cast<double>(v));
        hi = std::max(hi, static_cast<double>(v));
    }
    for (const auto& f : forecasts) {
        for (double v : f.cumulative) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(lo <= hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    r.y_min = std::min(0.0, lo);
    r.y_max = hi > r.y_min ? hi : r.y_min + 1.0;
    return r;
}

inline std::string plot_curve(const BookingCurve& actual, const std::vector<SeriesForecast>& forecasts,
                              const std::string& title = "") {
    constexpr double W = 720, H = 440, L = 60, R = 150, T = 40, B = 50;
    const PlotRange r = plot_range(actual, forecasts);
    auto px = [&](double x) { return L + (x - r.x_min) / (r.x_max - r.x_min) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - r.y_min) / (r.y_max - r.y_min) * (H - T - B); };
    using detail::svg_num;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
       << W << ' ' << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        os << "<text x=\"" << L << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
           << detail::xml_escape(title) << "</text>\n";
    }
    // axes
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double yv = r.y_min + (r.y_max - r.y_min) * k / 4.0;
        os << "<text x=\"" << L - 6 << "\" y=\"" << svg_num(py(yv) + 4)
           << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << svg_num(yv) << "</text>\n";
        const double xv = r.x_min + (r.x_max - r.x_min) * k / 4.0;
        os << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << H - B + 16
           << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">"
           << svg_num(actual.horizon() - xv) << "</text>\n";
    }
    os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
       << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">days before departure</text>\n";

    auto polyline = [&](const std::vector<std::pair<double, double>>& pts, const char* color, const char* dash) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dash != nullptr) {
            os << " stroke-dasharray=\"" << dash << '"';
        }
        os << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os << (i ? " " : "") << svg_num(px(pts[i].first)) << ',' << svg_num(py(pts[i].second));
        }
        os << "\"/>\n";
    };

    const auto cum = actual.cumulative();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < cum.size(); ++i) {
        pts.emplace_back(static_cast<double>(i), cum[i]);
    }
    polyline(pts, "black", nullptr);
    if (actual.constrained()) {
        const auto obs = actual.observed_cumulative();
        pts.clear();
        for (std::size_t i = 0; i < obs.size(); ++i) {
            pts.emplace_back(static_cast<double>(i), obs[i]);
        }
        polyline(pts, "#7f7f7f", "4 3");
        const double xc = px(*actual.constrained_from);
        os << "<line x1=\"" << svg_num(xc) << "\" y1=\"" << T << "\" x2=\"" << svg_num(xc) << "\" y2=\"" << H - B
           << "\" stroke=\"#7f7f7f\" stroke-dasharray=\"2 2\"/>\n";
    }
    const int start = actual.constrained() ? *actual.constrained_from : actual.horizon();
    for (std::size_t m = 0; m < forecasts.size(); ++m) {
        pts.clear();
        if (start > 0) {
            pts.emplace_back(start - 1, actual.prefix_total());
        }
        for (std::size_t k = 0; k < forecasts[m].cumulative.size(); ++k) {
            pts.emplace_back(static_cast<double>(start) + static_cast<double>(k), forecasts[m].cumulative[k]);
        }
        polyline(pts, detail::palette(m), nullptr);
    }

    // legend
    double ly = T + 10;
    auto legend = [&](const std::string& label, const char* color) {
        os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
           << detail::xml_escape(label) << "</text>\n";
        ly += 18;
    };
    legend("actual", "black");
    if (actual.constrained()) {
        legend("observed", "#7f7f7f");
    }
    for (std::size_t m = 0; m < forecasts.size(); ++m) {
        legend(forecasts[m].method, detail::palette(m));
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace uncon

#endif  // UNCON_SVG_HPP
