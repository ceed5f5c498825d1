#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace doclayout {

// Thrown when a layout ends up with zero elements after filtering.
struct EmptyLayoutError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownLabelError : std::runtime_error {
    explicit UnknownLabelError(const std::string& label, int element_index = -1)
        : std::runtime_error(element_index >= 0
                                 ? "unknown label '" + label + "' at element " + std::to_string(element_index)
                                 : "unknown label '" + label + "'"),
          label(label),
          element_index(element_index) {}
    std::string label;
    int element_index;
};

enum class DocType { Textbook, Newspaper, Magazine, Exam, Academic, Slide };

inline constexpr int kDocTypeCount = 6;

const char* to_string(DocType t);
std::optional<DocType> doc_type_from_string(const std::string& s);

// Index into one taxonomy. Ids from different taxonomies must not be mixed.
struct CategoryId {
    std::uint16_t id = 0;
    friend bool operator==(CategoryId a, CategoryId b) { return a.id == b.id; }
    friend bool operator!=(CategoryId a, CategoryId b) { return a.id != b.id; }
    friend bool operator<(CategoryId a, CategoryId b) { return a.id < b.id; }
};

inline constexpr int kQuantBins = 1000;
inline constexpr double kBBoxEps = 1e-6;

// v in [0,1] -> bin in [0,999], floor rule with top clamp.
int quantize(double v);

// bin center of q.
double dequantize(int q);

// Normalized box, origin top-left.
struct BBox {
    double x = 0, y = 0, w = 0, h = 0;

    double area() const { return w * h; }
    double x2() const { return x + w; }
    double y2() const { return y + h; }
    double cx() const { return x + w / 2; }
    double cy() const { return y + h / 2; }

    bool valid() const {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && x <= 1 && y <= 1 &&
               x + w <= 1 + kBBoxEps && y + h <= 1 + kBBoxEps;
    }
};

struct QBBox {
    int qx = 0, qy = 0, qw = 1, qh = 1;
    friend bool operator==(const QBBox& a, const QBBox& b) {
        return a.qx == b.qx && a.qy == b.qy && a.qw == b.qw && a.qh == b.qh;
    }
};

QBBox quantize_box(const BBox& b);
BBox dequantize_box(const QBBox& q);

struct Element {
    CategoryId category;
    BBox bbox;

    QBBox qbox() const { return quantize_box(bbox); }
};

inline constexpr int kDefaultMaxElements = 256;

struct Layout {
    std::string id;
    DocType doc_type = DocType::Textbook;
    int canvas_w = 0, canvas_h = 0;
    std::vector<Element> elements;  // reading order

    std::size_t size() const { return elements.size(); }
};

// Absolute-pixel input form prior to normalization.
struct RawBox {
    std::string category;
    double x = 0, y = 0, w = 0, h = 0;
};

struct RawLayout {
    std::string id;
    DocType doc_type = DocType::Textbook;
    int canvas_w = 0, canvas_h = 0;
    std::vector<RawBox> boxes;  // reading order
};

struct NormalizeResult {
    Layout layout;
    int dropped = 0;  // zero-extent boxes removed
};

// Divides by canvas dims, clips to [0,1], drops zero-extent boxes.
// Categories are resolved by the caller-supplied lookup (label -> id).
// Throws EmptyLayoutError if nothing survives.
template <class Resolve>
NormalizeResult normalize_layout(const RawLayout& raw, Resolve&& resolve_category) {
    if (raw.canvas_w <= 0 || raw.canvas_h <= 0)
        throw std::domain_error("normalize_layout: non-positive canvas");
    NormalizeResult out;
    out.layout.id = raw.id;
    out.layout.doc_type = raw.doc_type;
    out.layout.canvas_w = raw.canvas_w;
    out.layout.canvas_h = raw.canvas_h;
    int index = 0;
    for (const RawBox& rb : raw.boxes) {
        double x = rb.x / raw.canvas_w;
        double y = rb.y / raw.canvas_h;
        double w = rb.w / raw.canvas_w;
        double h = rb.h / raw.canvas_h;
        // clip to the unit square
        double x1 = std::max(0.0, std::min(x, 1.0));
        double y1 = std::max(0.0, std::min(y, 1.0));
        double x2 = std::max(0.0, std::min(x + w, 1.0));
        double y2 = std::max(0.0, std::min(y + h, 1.0));
        if (x2 - x1 <= 0 || y2 - y1 <= 0) {
            ++out.dropped;
            ++index;
            continue;
        }
        Element e;
        e.category = resolve_category(rb.category, index);
        e.bbox = BBox{x1, y1, x2 - x1, y2 - y1};
        out.layout.elements.push_back(e);
        ++index;
    }
    if (out.layout.elements.empty())
        throw EmptyLayoutError("normalize_layout: no elements left for layout '" + raw.id + "'");
    return out;
}

}  // namespace doclayout
