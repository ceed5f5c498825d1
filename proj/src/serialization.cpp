#include "doclayout/serialization.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

namespace doclayout {

namespace {

constexpr const char* kSpecialText[6] = {"<|cat_start|>", "<|cat_end|>", "<|box_start|>",
                                         "<|box_end|>",   "<|sep|>",     "<|eos|>"};

std::uint64_t fnv1a(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Vocabulary::Vocabulary(const Taxonomy& taxonomy)
    : taxonomy_(taxonomy), n_labels_(taxonomy.size()) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, "vocab-v1");
    for (const auto& l : taxonomy_.labels()) h = fnv1a(fnv1a(h, l), "\x1f");
    hash_ = h;
}

Token Vocabulary::label_token(CategoryId c) const {
    if (c.id >= n_labels_) throw std::out_of_range("label_token: bad category id");
    return 6 + c.id;
}

Token Vocabulary::coord_token(int role, int value) const {
    if (role < 0 || role > 3 || value < 0 || value > 999)
        throw std::domain_error("coord_token: role/value out of range");
    return coord_base() + role * 1000 + value;
}

Token Vocabulary::doctype_token(DocType t) const {
    return coord_base() + 4000 + static_cast<Token>(t);
}

CategoryId Vocabulary::category_of(Token t) const {
    if (!is_label(t)) throw std::domain_error("category_of: not a label token");
    return CategoryId{static_cast<std::uint16_t>(t - 6)};
}

int Vocabulary::role_of(Token t) const {
    if (!is_coord(t)) throw std::domain_error("role_of: not a coordinate token");
    return (t - coord_base()) / 1000;
}

int Vocabulary::value_of(Token t) const {
    if (!is_coord(t)) throw std::domain_error("value_of: not a coordinate token");
    return (t - coord_base()) % 1000;
}

DocType Vocabulary::doctype_of(Token t) const {
    if (!is_doctype(t)) throw std::domain_error("doctype_of: not a doc-type token");
    return static_cast<DocType>(t - coord_base() - 4000);
}

std::string Vocabulary::token_text(Token t) const {
    if (is_special(t)) return kSpecialText[t];
    if (is_label(t)) return taxonomy_.label(category_of(t));
    if (is_coord(t)) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%d%03d", role_of(t), value_of(t));
        return buf;
    }
    if (is_doctype(t)) return std::string("<|doc:") + to_string(doctype_of(t)) + "|>";
    throw std::domain_error("token_text: id out of range: " + std::to_string(t));
}

Token Vocabulary::token_from_text(const std::string& s) const {
    for (int i = 0; i < 6; ++i)
        if (s == kSpecialText[i]) return i;
    if (s.size() == 4 && std::isdigit(static_cast<unsigned char>(s[0]))) {
        int role = s[0] - '0';
        if (role <= 3 && std::isdigit(static_cast<unsigned char>(s[1])) &&
            std::isdigit(static_cast<unsigned char>(s[2])) &&
            std::isdigit(static_cast<unsigned char>(s[3])))
            return coord_token(role, std::stoi(s.substr(1)));
    }
    if (s.rfind("<|doc:", 0) == 0 && s.size() > 8) {
        auto dt = doc_type_from_string(s.substr(6, s.size() - 8));
        if (dt) return doctype_token(*dt);
    }
    if (taxonomy_.contains(s)) return label_token(taxonomy_.id_of(s));
    throw std::domain_error("token_from_text: unknown token '" + s + "'");
}

TokenSequence encode_layout(const Layout& layout, const Vocabulary& vocab) {
    if (layout.elements.empty())
        throw EmptyLayoutError("encode_layout: empty layout '" + layout.id + "'");
    TokenSequence seq;
    seq.reserve(9 * layout.elements.size() + 1);
    for (const Element& e : layout.elements) {
        QBBox q = e.qbox();
        seq.push_back(Vocabulary::CatStart);
        seq.push_back(vocab.label_token(e.category));
        seq.push_back(Vocabulary::CatEnd);
        seq.push_back(Vocabulary::BoxStart);
        seq.push_back(vocab.coord_token(0, q.qx));
        seq.push_back(vocab.coord_token(1, q.qy));
        seq.push_back(vocab.coord_token(2, q.qw));
        seq.push_back(vocab.coord_token(3, q.qh));
        seq.push_back(Vocabulary::BoxEnd);
    }
    seq.push_back(Vocabulary::Eos);
    return seq;
}

namespace {

enum class PState { CatStartOrEos, Cat, CatEnd, BoxStart, X, Y, W, H, BoxEnd };

const char* expected_of(PState s) {
    switch (s) {
        case PState::CatStartOrEos: return "cat_start or eos";
        case PState::Cat: return "category label";
        case PState::CatEnd: return "cat_end";
        case PState::BoxStart: return "box_start";
        case PState::X: return "role-0 coordinate";
        case PState::Y: return "role-1 coordinate";
        case PState::W: return "role-2 coordinate";
        case PState::H: return "role-3 coordinate";
        case PState::BoxEnd: return "box_end";
    }
    return "?";
}

}  // namespace

DecodeResult decode_layout(const TokenSequence& seq, const Vocabulary& vocab, DecodeMode mode) {
    DecodeResult out;
    out.layout.doc_type = DocType::Textbook;
    out.layout.canvas_w = out.layout.canvas_h = 1000;

    PState state = PState::CatStartOrEos;
    Element cur{};
    QBBox q{};
    bool saw_eos = false;
    std::size_t i = 0;

    auto fail = [&](std::size_t at) {
        if (mode == DecodeMode::Strict) throw ParseError(at, expected_of(state));
        out.diagnostics.push_back("dropped fragment at token " + std::to_string(at) + ", expected " +
                                  std::string(expected_of(state)));
        // resync at the next cat_start (the failing token itself may be one)
        std::size_t j = at;
        while (j < seq.size() && seq[j] != Vocabulary::CatStart) ++j;
        i = j;
        state = PState::CatStartOrEos;
    };

    while (i < seq.size()) {
        if (saw_eos) {
            if (mode == DecodeMode::Strict) throw ParseError(i, "end of sequence after eos");
            out.diagnostics.push_back("trailing tokens after eos ignored");
            break;
        }
        Token t = seq[i];
        switch (state) {
            case PState::CatStartOrEos:
                if (t == Vocabulary::CatStart) { state = PState::Cat; ++i; }
                else if (t == Vocabulary::Eos) { saw_eos = true; ++i; }
                else { fail(i); }
                break;
            case PState::Cat:
                if (vocab.is_label(t)) { cur.category = vocab.category_of(t); state = PState::CatEnd; ++i; }
                else fail(i);
                break;
            case PState::CatEnd:
                if (t == Vocabulary::CatEnd) { state = PState::BoxStart; ++i; } else fail(i);
                break;
            case PState::BoxStart:
                if (t == Vocabulary::BoxStart) { state = PState::X; ++i; } else fail(i);
                break;
            case PState::X:
                if (vocab.is_coord_role(t, 0)) { q.qx = vocab.value_of(t); state = PState::Y; ++i; }
                else fail(i);
                break;
            case PState::Y:
                if (vocab.is_coord_role(t, 1)) { q.qy = vocab.value_of(t); state = PState::W; ++i; }
                else fail(i);
                break;
            case PState::W:
                if (vocab.is_coord_role(t, 2)) { q.qw = vocab.value_of(t); state = PState::H; ++i; }
                else fail(i);
                break;
            case PState::H:
                if (vocab.is_coord_role(t, 3)) { q.qh = vocab.value_of(t); state = PState::BoxEnd; ++i; }
                else fail(i);
                break;
            case PState::BoxEnd:
                if (t == Vocabulary::BoxEnd) {
                    cur.bbox = dequantize_box(q);
                    out.layout.elements.push_back(cur);
                    state = PState::CatStartOrEos;
                    ++i;
                } else fail(i);
                break;
        }
    }
    if (!saw_eos) {
        if (mode == DecodeMode::Strict) throw ParseError(seq.size(), expected_of(state));
        out.diagnostics.push_back("sequence ended without eos");
    }
    if (out.layout.elements.empty())
        throw EmptyLayoutError("decode_layout: no elements recovered");
    return out;
}

namespace {

// Values that may exceed the 0..999 coordinate range (canvas dims) are split
// into thousands + remainder, both rendered in the given role's token space.
void push_wide_value(TokenSequence& seq, const Vocabulary& vocab, int role, int value) {
    int hi = std::min(value / 1000, 999);
    int lo = value % 1000;
    seq.push_back(vocab.coord_token(role, hi));
    seq.push_back(vocab.coord_token(role, lo));
}

}  // namespace

TokenSequence build_prompt(const PromptHeader& header, const ConditionList& condition,
                           const Vocabulary& vocab) {
    if (header.bbox_count < 1)
        throw std::domain_error("build_prompt: bbox_count must be >= 1");
    if (static_cast<int>(condition.size()) > header.bbox_count)
        throw ConditionMismatchError("build_prompt: condition longer than bbox_count (" +
                                     std::to_string(condition.size()) + " > " +
                                     std::to_string(header.bbox_count) + ")");
    TokenSequence seq;
    seq.push_back(vocab.doctype_token(header.doc_type));
    push_wide_value(seq, vocab, 0, header.canvas_w);
    push_wide_value(seq, vocab, 1, header.canvas_h);
    seq.push_back(vocab.coord_token(2, std::min(header.bbox_count, 999)));
    for (CategoryId c : header.valid_categories) seq.push_back(vocab.label_token(c));
    seq.push_back(Vocabulary::Sep);
    for (const ConditionTuple& t : condition) {
        if (t.category) {
            seq.push_back(Vocabulary::CatStart);
            seq.push_back(vocab.label_token(*t.category));
            seq.push_back(Vocabulary::CatEnd);
        }
        if (t.size || t.pos) {
            seq.push_back(Vocabulary::BoxStart);
            if (t.pos) {
                seq.push_back(vocab.coord_token(0, t.pos->first));
                seq.push_back(vocab.coord_token(1, t.pos->second));
            }
            if (t.size) {
                seq.push_back(vocab.coord_token(2, t.size->first));
                seq.push_back(vocab.coord_token(3, t.size->second));
            }
            seq.push_back(Vocabulary::BoxEnd);
        }
    }
    seq.push_back(Vocabulary::Sep);
    return seq;
}

std::string tokens_to_text(const TokenSequence& seq, const Vocabulary& vocab) {
    std::ostringstream os;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i) os << ' ';
        os << vocab.token_text(seq[i]);
    }
    return os.str();
}

TokenSequence tokens_from_text(const std::string& text, const Vocabulary& vocab) {
    TokenSequence seq;
    std::istringstream is(text);
    std::string word;
    while (is >> word) seq.push_back(vocab.token_from_text(word));
    return seq;
}

}  // namespace doclayout
