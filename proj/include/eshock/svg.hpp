#pragma once

#include <string>

#include "eshock/lp.hpp"

namespace eshock {

struct SvgOptions {
    std::string title;
    std::string x_label = "business days";
    std::string y_label = "percent";
    double y_scale = 100.0;  // log points -> percent by default
    int width = 640;
    int height = 420;
    std::string comment;  // embedded as an XML comment, e.g. config hash
};

/// Self-contained SVG: point-estimate line with nested 68/90 shaded bands,
/// a zero line, and labeled axes. References no external resources.
std::string render_irf_svg(const ImpulseResponse& ir, const SvgOptions& options);

}  // namespace eshock
