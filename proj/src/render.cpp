#include "doclayout/render.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace doclayout {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// HSL with fixed saturation/lightness; hue from the label hash.
std::string hsl_to_hex(double hue) {
    const double s = 0.55, l = 0.62;
    double c = (1 - std::abs(2 * l - 1)) * s;
    double hp = hue / 60.0;
    double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    double m = l - c / 2;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>((r + m) * 255 + 0.5),
                  static_cast<int>((g + m) * 255 + 0.5), static_cast<int>((b + m) * 255 + 0.5));
    return buf;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void emit_page(std::ostringstream& os, const Layout& layout, const Taxonomy& taxonomy,
               const RenderStyle& style, double y_offset) {
    os << "  <rect x=\"0\" y=\"" << fmt(y_offset) << "\" width=\"" << style.canvas_px_w
       << "\" height=\"" << style.canvas_px_h << "\" fill=\"white\" stroke=\"#888\"/>\n";
    for (const Element& e : layout.elements) {
        double x = e.bbox.x * style.canvas_px_w;
        double y = y_offset + e.bbox.y * style.canvas_px_h;
        double w = e.bbox.w * style.canvas_px_w;
        double h = e.bbox.h * style.canvas_px_h;
        const std::string& label = taxonomy.label(e.category);
        os << "  <rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\"" << fmt(w)
           << "\" height=\"" << fmt(h) << "\" fill=\"" << category_color(label)
           << "\" fill-opacity=\"0.6\" stroke=\"black\" stroke-width=\"" << fmt(style.stroke_width)
           << "\"/>\n";
        if (style.labels)
            os << "  <text x=\"" << fmt(x + 2) << "\" y=\"" << fmt(y + 12)
               << "\" font-size=\"10\" font-family=\"sans-serif\">" << label << "</text>\n";
    }
}

}  // namespace

std::string category_color(const std::string& label) {
    return hsl_to_hex(static_cast<double>(fnv1a(label) % 360));
}

std::string render_svg(const Layout& layout, const Taxonomy& taxonomy, const RenderStyle& style) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.canvas_px_w
       << "\" height=\"" << style.canvas_px_h << "\" viewBox=\"0 0 " << style.canvas_px_w << " "
       << style.canvas_px_h << "\">\n";
    emit_page(os, layout, taxonomy, style, 0.0);
    os << "</svg>\n";
    return os.str();
}

std::string render_sheet(const std::vector<Layout>& layouts, const Taxonomy& taxonomy,
                         const RenderStyle& style) {
    const int gap = 10;
    const int total_h =
        static_cast<int>(layouts.size()) * (style.canvas_px_h + gap) - (layouts.empty() ? 0 : gap);
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.canvas_px_w
       << "\" height=\"" << total_h << "\" viewBox=\"0 0 " << style.canvas_px_w << " " << total_h
       << "\">\n";
    double y = 0;
    for (const Layout& l : layouts) {
        emit_page(os, l, taxonomy, style, y);
        y += style.canvas_px_h + gap;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace doclayout
