#include <doctest.h>

#include "doclayout/taxonomy.hpp"

using namespace doclayout;

namespace {

LabelMap paper_example_map() {
    Taxonomy coarse("coarse", {"text", "title"}, Granularity::Coarse);
    Taxonomy fine("fine", {"paragraph", "lead", "ordered_list", "headline"}, Granularity::Fine);
    std::map<std::string, std::vector<std::string>> expansion{
        {"text", {"paragraph", "lead", "ordered_list"}},
        {"title", {"headline"}},
    };
    return LabelMap(std::move(coarse), std::move(fine), std::move(expansion));
}

}  // namespace

TEST_CASE("default coarse taxonomy has ten labels") {
    Taxonomy t = Taxonomy::default_coarse();
    CHECK(t.size() == 10);
    CHECK(t.contains("text"));
    CHECK(t.contains("page_footer"));
}

TEST_CASE("taxonomy normalizes and rejects bad labels") {
    Taxonomy t("t", {"Text", "TITLE"}, Granularity::Coarse);
    CHECK(t.labels()[0] == "text");
    CHECK(t.labels()[1] == "title");
    CHECK_THROWS(Taxonomy("t", {"a", "a"}, Granularity::Coarse));
    CHECK_THROWS(Taxonomy("t", {""}, Granularity::Coarse));
    CHECK_THROWS(Taxonomy("t", {"has space"}, Granularity::Coarse));
}

TEST_CASE("coarsen follows the expansion map") {
    LabelMap map = paper_example_map();
    CHECK(map.coarsen("paragraph") == "text");
    CHECK(map.coarsen("lead") == "text");
    CHECK(map.coarsen("ordered_list") == "text");
    CHECK(map.coarsen("headline") == "title");
    CHECK_THROWS_AS(map.coarsen("zzz"), UnknownLabelError);
}

TEST_CASE("identity map coarsens to itself") {
    Taxonomy t = Taxonomy::default_coarse();
    LabelMap id = LabelMap::identity(t);
    for (const auto& l : t.labels()) CHECK(id.coarsen(l) == l);
}

TEST_CASE("coarsen is total over the fine set") {
    LabelMap map = paper_example_map();
    for (std::size_t i = 0; i < map.fine().size(); ++i)
        CHECK_NOTHROW(map.coarsen(CategoryId{static_cast<std::uint16_t>(i)}));
}

TEST_CASE("project_layout remaps categories only") {
    LabelMap map = paper_example_map();
    Layout layout;
    layout.canvas_w = layout.canvas_h = 100;
    layout.elements = {
        {map.fine().id_of("paragraph"), BBox{0.1, 0.1, 0.2, 0.2}},
        {map.fine().id_of("lead"), BBox{0.4, 0.1, 0.2, 0.2}},
        {map.fine().id_of("paragraph"), BBox{0.7, 0.1, 0.2, 0.2}},
    };
    Layout proj = map.project_layout(layout);
    REQUIRE(proj.elements.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(map.coarse().label(proj.elements[i].category) == "text");
        CHECK(proj.elements[i].bbox.x == layout.elements[i].bbox.x);
        CHECK(proj.elements[i].bbox.w == layout.elements[i].bbox.w);
    }
}

TEST_CASE("project_layout reports the failing element index") {
    LabelMap map = paper_example_map();
    Layout layout;
    layout.elements = {{map.fine().id_of("paragraph"), BBox{0.1, 0.1, 0.2, 0.2}},
                       {CategoryId{99}, BBox{0.4, 0.1, 0.2, 0.2}}};
    try {
        map.project_layout(layout);
        FAIL("expected UnknownLabelError");
    } catch (const UnknownLabelError& e) {
        CHECK(e.element_index == 1);
    }
}

TEST_CASE("validate_parts flags overlap, coverage and empty expansions") {
    Taxonomy coarse("coarse", {"text", "title"}, Granularity::Coarse);
    Taxonomy fine("fine", {"paragraph", "lead", "headline"}, Granularity::Fine);

    SUBCASE("valid partition") {
        std::map<std::string, std::vector<std::string>> exp{{"text", {"paragraph", "lead"}},
                                                            {"title", {"headline"}}};
        CHECK(LabelMap::validate_parts(coarse, fine, exp).valid());
    }
    SUBCASE("overlapping descendants") {
        std::map<std::string, std::vector<std::string>> exp{{"text", {"paragraph", "lead"}},
                                                            {"title", {"headline", "lead"}}};
        auto v = LabelMap::validate_parts(coarse, fine, exp);
        CHECK_FALSE(v.valid());
        REQUIRE(v.overlaps.size() == 1);
        CHECK(v.overlaps[0] == "lead");
        CHECK_THROWS(LabelMap(coarse, fine, exp));
    }
    SUBCASE("uncovered fine label") {
        std::map<std::string, std::vector<std::string>> exp{{"text", {"paragraph"}},
                                                            {"title", {"headline"}}};
        auto v = LabelMap::validate_parts(coarse, fine, exp);
        REQUIRE(v.uncovered.size() == 1);
        CHECK(v.uncovered[0] == "lead");
    }
    SUBCASE("empty expansion") {
        std::map<std::string, std::vector<std::string>> exp{
            {"text", {"paragraph", "lead", "headline"}}, {"title", {}}};
        auto v = LabelMap::validate_parts(coarse, fine, exp);
        REQUIRE(v.empty_expansions.size() == 1);
        CHECK(v.empty_expansions[0] == "title");
    }
}

TEST_CASE("label map JSON round-trip") {
    LabelMap map = paper_example_map();
    LabelMap back = LabelMap::from_json_text(map.to_json_text());
    CHECK(back.coarse().labels() == map.coarse().labels());
    CHECK(back.fine().labels() == map.fine().labels());
    CHECK(back.coarsen("ordered_list") == "text");
}
