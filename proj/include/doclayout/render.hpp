#pragma once

#include <string>
#include <vector>

#include "doclayout/core.hpp"
#include "doclayout/taxonomy.hpp"

namespace doclayout {

struct RenderStyle {
    int canvas_px_w = 600;
    int canvas_px_h = 800;
    double stroke_width = 1.0;
    bool labels = true;
};

// Stable per-label fill color (hash-derived hue); same taxonomy, same palette.
std::string category_color(const std::string& label);

// Standalone SVG, one rect per element in reading order (later painted above).
std::string render_svg(const Layout& layout, const Taxonomy& taxonomy, const RenderStyle& style);

// All pages stacked vertically in a single document.
std::string render_sheet(const std::vector<Layout>& layouts, const Taxonomy& taxonomy,
                         const RenderStyle& style);

}  // namespace doclayout
