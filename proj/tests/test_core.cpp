#include <doctest.h>

#include <random>

#include "doclayout/core.hpp"

using namespace doclayout;

TEST_CASE("quantize endpoints and interior") {
    CHECK(quantize(0.0) == 0);
    CHECK(quantize(1.0) == 999);
    CHECK(quantize(0.25) == 250);
    CHECK_THROWS_AS(quantize(-0.1), std::domain_error);
    CHECK_THROWS_AS(quantize(1.1), std::domain_error);
}

TEST_CASE("dequantize bin centers") {
    CHECK(dequantize(0) == doctest::Approx(0.0005).epsilon(1e-12));
    CHECK(dequantize(999) == doctest::Approx(0.9995).epsilon(1e-12));
    CHECK(dequantize(250) == doctest::Approx(0.2505).epsilon(1e-12));
    CHECK_THROWS_AS(dequantize(-1), std::domain_error);
    CHECK_THROWS_AS(dequantize(1000), std::domain_error);
}

TEST_CASE("round trip within half a bin") {
    // all bin centers exactly
    for (int q = 0; q < 1000; ++q) CHECK(quantize(dequantize(q)) == q);
    // random values
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 20000; ++i) {
        double v = unif(rng);
        int q = quantize(v);
        if (q < 999) CHECK(std::abs(dequantize(q) - v) <= 0.0005 + 1e-12);
    }
}

TEST_CASE("quantize is monotone") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < 5000; ++i) {
        double a = unif(rng), b = unif(rng);
        if (a > b) std::swap(a, b);
        CHECK(quantize(a) <= quantize(b));
    }
}

namespace {

CategoryId fixed_resolver(const std::string&, int) { return CategoryId{0}; }

}  // namespace

TEST_CASE("normalize_layout divides by canvas") {
    RawLayout raw;
    raw.id = "p1";
    raw.canvas_w = raw.canvas_h = 1000;
    raw.boxes = {{"text", 100, 200, 500, 50}};
    auto res = normalize_layout(raw, fixed_resolver);
    REQUIRE(res.layout.elements.size() == 1);
    const BBox& b = res.layout.elements[0].bbox;
    CHECK(b.x == doctest::Approx(0.1));
    CHECK(b.y == doctest::Approx(0.2));
    CHECK(b.w == doctest::Approx(0.5));
    CHECK(b.h == doctest::Approx(0.05));
    CHECK(res.dropped == 0);
}

TEST_CASE("normalize_layout full page and clamping") {
    RawLayout raw;
    raw.canvas_w = raw.canvas_h = 1000;
    raw.boxes = {{"a", 0, 0, 1000, 1000}, {"b", 990, 990, 50, 50}};
    auto res = normalize_layout(raw, fixed_resolver);
    REQUIRE(res.layout.elements.size() == 2);
    CHECK(res.layout.elements[0].bbox.w == doctest::Approx(1.0));
    const BBox& clipped = res.layout.elements[1].bbox;
    CHECK(clipped.x == doctest::Approx(0.99));
    CHECK(clipped.y == doctest::Approx(0.99));
    CHECK(clipped.w == doctest::Approx(0.01));
    CHECK(clipped.h == doctest::Approx(0.01));
}

TEST_CASE("normalize_layout drops zero-extent boxes and errors when empty") {
    RawLayout raw;
    raw.canvas_w = raw.canvas_h = 100;
    raw.boxes = {{"a", 10, 10, 0, 5}};
    CHECK_THROWS_AS(normalize_layout(raw, fixed_resolver), EmptyLayoutError);
    raw.boxes.push_back({"b", 10, 10, 5, 5});
    auto res = normalize_layout(raw, fixed_resolver);
    CHECK(res.dropped == 1);
    CHECK(res.layout.elements.size() == 1);
}

TEST_CASE("normalize_layout preserves reading order") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pos(0, 90);
    for (int trial = 0; trial < 50; ++trial) {
        RawLayout raw;
        raw.canvas_w = raw.canvas_h = 100;
        int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i)
            raw.boxes.push_back({"c" + std::to_string(i), double(pos(rng)), double(pos(rng)), 5, 5});
        int next = 0;
        auto res = normalize_layout(raw, [&](const std::string& label, int) {
            CHECK(label == "c" + std::to_string(next));
            return CategoryId{static_cast<std::uint16_t>(next++)};
        });
        for (std::size_t i = 0; i < res.layout.elements.size(); ++i)
            CHECK(res.layout.elements[i].category.id == i);
    }
}

TEST_CASE("element quantized view round-trips") {
    Element e{CategoryId{0}, BBox{0.123, 0.456, 0.2, 0.3}};
    QBBox q = e.qbox();
    CHECK(q.qx == 123);
    CHECK(std::abs(dequantize(q.qx) - e.bbox.x) <= 0.0005 + 1e-12);
}
