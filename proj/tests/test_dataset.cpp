#include <doctest.h>

#include <sstream>

#include "doclayout/dataset.hpp"
#include "test_util.hpp"

using namespace doclayout;
using testutil::random_layout;

namespace {

const Taxonomy& coarse() {
    static Taxonomy t = Taxonomy::default_coarse();
    return t;
}

std::string sample_line(const std::string& id, const std::string& cat = "text") {
    return R"({"id":")" + id + R"(","doc_type":"newspaper","width":1000,"height":1000,)" +
           R"("elements":[{"category":")" + cat + R"(","bbox":[100,200,500,50],"order":0}]})";
}

struct Collected {
    std::vector<Layout> layouts;
    std::vector<Rejection> rejections;
};

Collected run_ingest(const std::string& text, IngestOptions opts = {}) {
    Collected c;
    std::istringstream in(text);
    Ingestor ing(coarse(), opts);
    ing.run(
        in, [&](const Layout& l, const LayoutRecord&) { c.layouts.push_back(l); },
        [&](const Rejection& r) { c.rejections.push_back(r); });
    return c;
}

}  // namespace

TEST_CASE("record JSON round-trip") {
    LayoutRecord r = record_from_json_line(sample_line("p1"));
    CHECK(r.id == "p1");
    CHECK(r.elements.size() == 1);
    CHECK(r.elements[0].w == 500);
    LayoutRecord back = record_from_json_line(record_to_json_line(r));
    CHECK(back.id == r.id);
    CHECK(back.elements[0].x == r.elements[0].x);
}

TEST_CASE("record respects the reading-order field") {
    std::string line =
        R"({"id":"p","doc_type":"exam","width":100,"height":100,"elements":[)"
        R"({"category":"text","bbox":[0,0,10,10],"order":1},)"
        R"({"category":"title","bbox":[20,0,10,10],"order":0}]})";
    Layout l = record_to_layout(record_from_json_line(line), coarse());
    REQUIRE(l.elements.size() == 2);
    CHECK(coarse().label(l.elements[0].category) == "title");
    CHECK(coarse().label(l.elements[1].category) == "text");
}

TEST_CASE("ingest accepts valid lines and logs rejection reasons") {
    std::string text = sample_line("a") + "\n" + "not json\n" + sample_line("a") + "\n" +
                       sample_line("b", "nosuchcat") + "\n" +
                       R"({"id":"c","doc_type":"paper","width":10,"height":10,"elements":[]})" +
                       "\n" + sample_line("d") + "\n";
    Collected c = run_ingest(text);
    // d duplicates a's geometry, so only a survives
    CHECK(c.layouts.size() == 1);
    REQUIRE(c.rejections.size() == 5);
    CHECK(c.rejections[0].reason == "malformed");
    CHECK(c.rejections[1].reason == "duplicate");  // repeated id
    CHECK(c.rejections[2].reason == "unknown-category");
    CHECK(c.rejections[3].reason == "bad-doc-type");
    CHECK(c.rejections[4].reason == "duplicate");  // same quantized geometry
    Collected no_dedup = run_ingest(sample_line("a") + "\n" + sample_line("d") + "\n",
                                    IngestOptions{.dedup = false});
    CHECK(no_dedup.layouts.size() == 2);
}

TEST_CASE("ingest drops empty and oversized records") {
    std::string empty =
        R"({"id":"e","doc_type":"slide","width":10,"height":10,"elements":[]})";
    Collected c = run_ingest(empty + "\n");
    REQUIRE(c.rejections.size() == 1);
    CHECK(c.rejections[0].reason == "empty");

    IngestOptions small;
    small.max_elements = 1;
    std::string two =
        R"({"id":"t","doc_type":"slide","width":100,"height":100,"elements":[)"
        R"({"category":"text","bbox":[0,0,10,10],"order":0},)"
        R"({"category":"text","bbox":[20,0,10,10],"order":1}]})";
    Collected c2 = run_ingest(two + "\n", small);
    REQUIRE(c2.rejections.size() == 1);
    CHECK(c2.rejections[0].reason == "count-bounds");
}

TEST_CASE("ingest is idempotent over its own output") {
    std::mt19937_64 rng(41);
    std::ostringstream first_out;
    std::string input;
    for (int i = 0; i < 50; ++i) {
        Layout l = random_layout(rng, coarse().size(), 6);
        l.id = "p" + std::to_string(i);
        input += record_to_json_line(layout_to_record(l, coarse())) + "\n";
    }
    Collected pass1 = run_ingest(input);
    std::string output;
    for (const Layout& l : pass1.layouts)
        output += record_to_json_line(layout_to_record(l, coarse())) + "\n";
    Collected pass2 = run_ingest(output);
    CHECK(pass2.rejections.empty());
    CHECK(pass2.layouts.size() == pass1.layouts.size());
}

TEST_CASE("dedup keys collide exactly for sub-bin jitter") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> jitter(-0.0004, 0.0004);
    for (int trial = 0; trial < 100; ++trial) {
        Layout l = random_layout(rng, coarse().size(), 5);
        LayoutRecord a = layout_to_record(l, coarse());
        CHECK(dedup_key(a) == dedup_key(a));

        // jitter below half a bin width, anchored to bin centers so the
        // perturbed coordinate stays inside the same bin
        Layout centered = l;
        for (Element& e : centered.elements) e.bbox = dequantize_box(e.qbox());
        LayoutRecord base = layout_to_record(centered, coarse());
        LayoutRecord wobble = base;
        for (RecordElement& e : wobble.elements) {
            e.x += jitter(rng) * 1000;
            e.y += jitter(rng) * 1000;
        }
        CHECK(dedup_key(base) == dedup_key(wobble));

        LayoutRecord moved = base;
        moved.elements[0].x += 2.0;  // two pixels = two bins
        CHECK(dedup_key(base) != dedup_key(moved));
    }
}

TEST_CASE("stats accumulate and merge associatively") {
    std::mt19937_64 rng(43);
    std::vector<Layout> layouts;
    for (int i = 0; i < 200; ++i) layouts.push_back(random_layout(rng, coarse().size(), 8));

    CorpusStats whole;
    for (const Layout& l : layouts) whole.add(l, coarse());
    CHECK(whole.pages == 200);
    std::uint64_t count_mass = 0;
    for (auto& [_, c] : whole.element_count_hist) count_mass += c;
    CHECK(count_mass == whole.pages);
    std::uint64_t cat_mass = 0;
    for (auto& [_, m] : whole.category_by_doc_type)
        for (auto& [_, c] : m) cat_mass += c;
    CHECK(cat_mass == whole.elements);

    // random 3-way split merges to the same totals
    CorpusStats s1, s2, s3;
    for (std::size_t i = 0; i < layouts.size(); ++i)
        (i % 3 == 0 ? s1 : i % 3 == 1 ? s2 : s3).add(layouts[i], coarse());
    CorpusStats merged = s1;
    merged.merge(s2);
    merged.merge(s3);
    CHECK(merged.to_json() == whole.to_json());
}

TEST_CASE("stats hand case") {
    Layout l;
    l.doc_type = DocType::Magazine;
    l.canvas_w = l.canvas_h = 1000;
    l.elements = {{CategoryId{0}, BBox{0.0, 0.0, 0.5, 0.2}},
                  {CategoryId{0}, BBox{0.5, 0.0, 0.5, 0.2}},
                  {CategoryId{1}, BBox{0.0, 0.5, 0.5, 0.2}}};
    CorpusStats s;
    s.add(l, coarse());
    CHECK(s.element_count_hist.at(3) == 1);
    // total area 0.3 lands in bin floor(0.3/0.05) = 6
    CHECK(s.area_ratio_hist.at(6) == 1);
    CHECK(s.pages_per_doc_type.at("magazine") == 1);
}

TEST_CASE("feature export emits one row per page") {
    std::mt19937_64 rng(44);
    std::vector<Layout> layouts;
    for (int i = 0; i < 10; ++i) layouts.push_back(random_layout(rng, coarse().size(), 4));
    std::ostringstream out;
    CHECK(export_features(layouts, coarse(), out) == 10);
    std::string csv = out.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);  // header + rows

    Layout full;
    full.id = "full";
    full.doc_type = DocType::Slide;
    full.canvas_w = full.canvas_h = 100;
    full.elements = {{CategoryId{0}, BBox{0, 0, 1, 1}}};
    std::ostringstream single;
    export_features({full}, coarse(), single);
    std::string row = single.str().substr(single.str().find('\n') + 1);
    CHECK(row.rfind("full,slide,1,1,0.5,0.5", 0) == 0);
}
