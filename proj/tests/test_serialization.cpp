#include <doctest.h>

#include <random>

#include "doclayout/serialization.hpp"
#include "test_util.hpp"

using namespace doclayout;
using testutil::random_layout;

namespace {

Vocabulary make_vocab() { return Vocabulary(Taxonomy::default_coarse()); }

}  // namespace

TEST_CASE("vocabulary accounting and token classes") {
    Vocabulary v = make_vocab();
    CHECK(v.size() == 6 + 10 + 4000 + 6);
    CHECK(v.is_special(Vocabulary::Eos));
    Token t = v.coord_token(2, 500);
    CHECK(v.is_coord(t));
    CHECK(v.role_of(t) == 2);
    CHECK(v.value_of(t) == 500);
    CHECK(v.is_coord_role(t, 2));
    CHECK_FALSE(v.is_coord_role(t, 1));
    CHECK(v.is_label(v.label_token(CategoryId{3})));
    CHECK(v.is_doctype(v.doctype_token(DocType::Slide)));
}

TEST_CASE("encode emits the element frame") {
    Vocabulary v = make_vocab();
    Layout l;
    l.canvas_w = l.canvas_h = 1000;
    CategoryId text = v.taxonomy().id_of("text");
    l.elements = {{text, BBox{0.1, 0.2, 0.5, 0.05}}};
    TokenSequence seq = encode_layout(l, v);
    TokenSequence expected = {Vocabulary::CatStart, v.label_token(text),  Vocabulary::CatEnd,
                              Vocabulary::BoxStart, v.coord_token(0, 100), v.coord_token(1, 200),
                              v.coord_token(2, 500), v.coord_token(3, 50), Vocabulary::BoxEnd,
                              Vocabulary::Eos};
    CHECK(seq == expected);
}

TEST_CASE("encode length is 9N+1") {
    Vocabulary v = make_vocab();
    std::mt19937_64 rng(1);
    Layout l = random_layout(rng, v.label_count());
    l.elements.resize(2);
    CHECK(encode_layout(l, v).size() == 19);
    Layout empty;
    CHECK_THROWS_AS(encode_layout(empty, v), EmptyLayoutError);
}

TEST_CASE("strict decode inverts encode within quantization error") {
    Vocabulary v = make_vocab();
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        Layout l = random_layout(rng, v.label_count());
        DecodeResult r = decode_layout(encode_layout(l, v), v, DecodeMode::Strict);
        REQUIRE(r.layout.elements.size() == l.elements.size());
        CHECK(r.diagnostics.empty());
        for (std::size_t i = 0; i < l.elements.size(); ++i) {
            CHECK(r.layout.elements[i].category == l.elements[i].category);
            CHECK(std::abs(r.layout.elements[i].bbox.x - l.elements[i].bbox.x) <= 0.0005 + 1e-12);
            CHECK(std::abs(r.layout.elements[i].bbox.y - l.elements[i].bbox.y) <= 0.0005 + 1e-12);
        }
    }
}

TEST_CASE("strict decode rejects a wrong-role coordinate") {
    Vocabulary v = make_vocab();
    Layout l;
    l.elements = {{CategoryId{0}, BBox{0.1, 0.2, 0.5, 0.05}}};
    TokenSequence seq = encode_layout(l, v);
    seq[4] = v.coord_token(1, 100);  // role-1 where role-0 expected
    try {
        decode_layout(seq, v, DecodeMode::Strict);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.index == 4);
        CHECK(e.expected.find("role-0") != std::string::npos);
    }
}

TEST_CASE("lenient decode resynchronizes on cat_start") {
    Vocabulary v = make_vocab();
    std::mt19937_64 rng(5);
    Layout l = random_layout(rng, v.label_count());
    while (l.elements.size() < 3) l.elements.push_back(l.elements[0]);
    TokenSequence seq = encode_layout(l, v);
    // delete the first element's box_end (index 8)
    seq.erase(seq.begin() + 8);
    DecodeResult r = decode_layout(seq, v, DecodeMode::Lenient);
    CHECK(r.layout.elements.size() == l.elements.size() - 1);
    CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("lenient decode loses at most one element per deleted token") {
    Vocabulary v = make_vocab();
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 30; ++trial) {
        Layout l = random_layout(rng, v.label_count(), 8);
        if (l.elements.size() < 2) continue;
        TokenSequence seq = encode_layout(l, v);
        for (std::size_t del = 0; del < seq.size(); ++del) {
            TokenSequence cut = seq;
            cut.erase(cut.begin() + del);
            DecodeResult r = decode_layout(cut, v, DecodeMode::Lenient);
            CHECK(r.layout.elements.size() + 1 >= l.elements.size());
        }
    }
}

TEST_CASE("lenient decode with nothing salvageable is an empty layout") {
    Vocabulary v = make_vocab();
    TokenSequence junk = {Vocabulary::BoxEnd, Vocabulary::CatEnd, Vocabulary::Eos};
    CHECK_THROWS_AS(decode_layout(junk, v, DecodeMode::Lenient), EmptyLayoutError);
}

TEST_CASE("prompt layout per regime") {
    Vocabulary v = make_vocab();
    PromptHeader h;
    h.doc_type = DocType::Newspaper;
    h.canvas_w = 1000;
    h.canvas_h = 1000;
    h.bbox_count = 12;

    SUBCASE("empty condition ends header sep sep") {
        TokenSequence p = build_prompt(h, {}, v);
        REQUIRE(p.size() >= 2);
        CHECK(p[p.size() - 1] == Vocabulary::Sep);
        CHECK(p[p.size() - 2] == Vocabulary::Sep);
        CHECK(p[0] == v.doctype_token(DocType::Newspaper));
    }
    SUBCASE("categories-only tuples") {
        h.bbox_count = 3;
        CategoryId title = v.taxonomy().id_of("title");
        CategoryId text = v.taxonomy().id_of("text");
        ConditionList cond(3);
        cond[0].category = title;
        cond[1].category = text;
        cond[2].category = text;
        TokenSequence p = build_prompt(h, cond, v);
        // condition segment: three [cat_start label cat_end] frames between the seps
        int cat_starts = 0;
        for (Token t : p) cat_starts += (t == Vocabulary::CatStart);
        CHECK(cat_starts == 3);
        bool any_box = false;
        for (Token t : p) any_box |= (t == Vocabulary::BoxStart);
        CHECK_FALSE(any_box);
    }
    SUBCASE("category plus size tuple") {
        h.bbox_count = 1;
        ConditionList cond(1);
        cond[0].category = v.taxonomy().id_of("title");
        cond[0].size = {{500, 100}};
        TokenSequence p = build_prompt(h, cond, v);
        TokenSequence tail(p.end() - 8, p.end());
        TokenSequence expected = {Vocabulary::CatStart, v.label_token(*cond[0].category),
                                  Vocabulary::CatEnd,   Vocabulary::BoxStart,
                                  v.coord_token(2, 500), v.coord_token(3, 100),
                                  Vocabulary::BoxEnd,   Vocabulary::Sep};
        CHECK(tail == expected);
    }
    SUBCASE("condition longer than count is rejected") {
        h.bbox_count = 1;
        ConditionList cond(2);
        CHECK_THROWS_AS(build_prompt(h, cond, v), ConditionMismatchError);
    }
}

TEST_CASE("prompt is deterministic") {
    Vocabulary v = make_vocab();
    PromptHeader h;
    h.doc_type = DocType::Exam;
    h.canvas_w = 816;
    h.canvas_h = 1056;
    h.bbox_count = 4;
    h.valid_categories = {v.taxonomy().id_of("text"), v.taxonomy().id_of("title")};
    ConditionList cond(2);
    cond[0].category = v.taxonomy().id_of("text");
    cond[1].category = v.taxonomy().id_of("title");
    CHECK(build_prompt(h, cond, v) == build_prompt(h, cond, v));
}

TEST_CASE("text form is bijective with token ids") {
    Vocabulary v = make_vocab();
    std::mt19937_64 rng(9);
    Layout l = random_layout(rng, v.label_count());
    TokenSequence seq = encode_layout(l, v);
    std::string text = tokens_to_text(seq, v);
    CHECK(tokens_from_text(text, v) == seq);
    // matches the printed template shape
    Layout one;
    one.elements = {{v.taxonomy().id_of("text"), BBox{0.1, 0.2, 0.5, 0.05}}};
    CHECK(tokens_to_text(encode_layout(one, v), v) ==
          "<|cat_start|> text <|cat_end|> <|box_start|> 0100 1200 2500 3050 <|box_end|> <|eos|>");
}
