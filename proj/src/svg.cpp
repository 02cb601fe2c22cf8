#include "eshock/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "eshock/errors.hpp"

namespace eshock {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
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

// largest "nice" tick step covering the range with 4-8 ticks
double nice_step(double range) {
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 2.5, 5.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string render_irf_svg(const ImpulseResponse& ir, const SvgOptions& opt) {
    if (ir.horizons.empty()) throw ValueError("cannot plot an empty impulse response");

    const double ml = 62, mr = 16, mt = 34, mb = 46;
    const double pw = opt.width - ml - mr;
    const double ph = opt.height - mt - mb;

    double lo = 0.0, hi = 0.0;
    for (const auto& h : ir.horizons) {
        lo = std::min(lo, opt.y_scale * h.lo90);
        hi = std::max(hi, opt.y_scale * h.hi90);
    }
    if (hi == lo) {
        hi += 1.0;
        lo -= 1.0;
    }
    const double pad = 0.06 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double x0 = ir.horizons.front().horizon;
    const double x1 = ir.horizons.back().horizon;
    auto px = [&](double h) { return ml + (x1 > x0 ? (h - x0) / (x1 - x0) : 0.5) * pw; };
    auto py = [&](double v) { return mt + (hi - v) / (hi - lo) * ph; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (!opt.comment.empty()) svg << "<!-- " << escape_xml(opt.comment) << " -->\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\""
        << opt.height << "\" viewBox=\"0 0 " << opt.width << " " << opt.height << "\">\n";
    svg << "<rect width=\"" << opt.width << "\" height=\"" << opt.height
        << "\" fill=\"white\"/>\n";

    auto band_path = [&](bool outer) {
        std::ostringstream d;
        for (std::size_t i = 0; i < ir.horizons.size(); ++i) {
            const auto& h = ir.horizons[i];
            d << (i == 0 ? "M" : "L") << fmt(px(h.horizon)) << ","
              << fmt(py(opt.y_scale * (outer ? h.hi90 : h.hi68))) << " ";
        }
        for (std::size_t i = ir.horizons.size(); i-- > 0;) {
            const auto& h = ir.horizons[i];
            d << "L" << fmt(px(h.horizon)) << ","
              << fmt(py(opt.y_scale * (outer ? h.lo90 : h.lo68))) << " ";
        }
        d << "Z";
        return d.str();
    };
    svg << "<path d=\"" << band_path(true) << "\" fill=\"#c9d9ee\" stroke=\"none\"/>\n";
    svg << "<path d=\"" << band_path(false) << "\" fill=\"#92b4dc\" stroke=\"none\"/>\n";

    // zero line
    if (lo < 0.0 && hi > 0.0)
        svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py(0)) << "\" x2=\""
            << fmt(ml + pw) << "\" y2=\"" << fmt(py(0))
            << "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";

    // point estimates
    svg << "<path d=\"";
    for (std::size_t i = 0; i < ir.horizons.size(); ++i) {
        const auto& h = ir.horizons[i];
        svg << (i == 0 ? "M" : "L") << fmt(px(h.horizon)) << ","
            << fmt(py(opt.y_scale * h.coef)) << " ";
    }
    svg << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";

    // axes
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(ml)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\"" << fmt(ml + pw)
        << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    const double ystep = nice_step(hi - lo);
    for (double v = std::ceil(lo / ystep) * ystep; v <= hi + 1e-12; v += ystep) {
        svg << "<line x1=\"" << fmt(ml - 4) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(ml)
            << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py(v) + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt(v)
            << "</text>\n";
    }
    const double xstep = std::max(1.0, std::round(nice_step(x1 - x0 + 1)));
    for (double h = x0; h <= x1 + 1e-12; h += xstep) {
        svg << "<line x1=\"" << fmt(px(h)) << "\" y1=\"" << fmt(mt + ph) << "\" x2=\""
            << fmt(px(h)) << "\" y2=\"" << fmt(mt + ph + 4)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(px(h)) << "\" y=\"" << fmt(mt + ph + 17)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << static_cast<int>(std::lround(h)) << "</text>\n";
    }

    svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 36)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
        << escape_xml(opt.x_label) << "</text>\n";
    svg << "<text x=\"14\" y=\"" << fmt(mt + ph / 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 14 "
        << fmt(mt + ph / 2) << ")\">" << escape_xml(opt.y_label) << "</text>\n";
    if (!opt.title.empty())
        svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"20\" font-family=\"sans-serif\" "
               "font-size=\"14\" font-weight=\"bold\" text-anchor=\"middle\">"
            << escape_xml(opt.title) << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace eshock
