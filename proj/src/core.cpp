#include "doclayout/core.hpp"

#include <cmath>

namespace doclayout {

const char* to_string(DocType t) {
    switch (t) {
        case DocType::Textbook: return "textbook";
        case DocType::Newspaper: return "newspaper";
        case DocType::Magazine: return "magazine";
        case DocType::Exam: return "exam";
        case DocType::Academic: return "academic";
        case DocType::Slide: return "slide";
    }
    return "?";
}

std::optional<DocType> doc_type_from_string(const std::string& s) {
    if (s == "textbook") return DocType::Textbook;
    if (s == "newspaper") return DocType::Newspaper;
    if (s == "magazine") return DocType::Magazine;
    if (s == "exam") return DocType::Exam;
    if (s == "academic") return DocType::Academic;
    if (s == "slide") return DocType::Slide;
    return std::nullopt;
}

int quantize(double v) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error("quantize: value out of [0,1]: " + std::to_string(v));
    int q = static_cast<int>(std::floor(v * kQuantBins));
    return q > kQuantBins - 1 ? kQuantBins - 1 : q;
}

double dequantize(int q) {
    if (q < 0 || q >= kQuantBins)
        throw std::domain_error("dequantize: bin out of [0,999]: " + std::to_string(q));
    return (q + 0.5) / kQuantBins;
}

QBBox quantize_box(const BBox& b) {
    QBBox q;
    q.qx = quantize(std::min(b.x, 1.0));
    q.qy = quantize(std::min(b.y, 1.0));
    q.qw = std::max(1, quantize(std::min(b.w, 1.0)));
    q.qh = std::max(1, quantize(std::min(b.h, 1.0)));
    return q;
}

BBox dequantize_box(const QBBox& q) {
    return BBox{dequantize(q.qx), dequantize(q.qy), dequantize(q.qw), dequantize(q.qh)};
}

}  // namespace doclayout
