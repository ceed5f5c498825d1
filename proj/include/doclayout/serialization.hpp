#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "doclayout/core.hpp"
#include "doclayout/taxonomy.hpp"

namespace doclayout {

using Token = int;
using TokenSequence = std::vector<Token>;

struct ParseError : std::runtime_error {
    ParseError(std::size_t index, std::string expected)
        : std::runtime_error("parse error at token " + std::to_string(index) + ": expected " + expected),
          index(index),
          expected(std::move(expected)) {}
    std::size_t index;
    std::string expected;
};

struct ConditionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token id space for one taxonomy:
//   [0,6)                      specials: cat_start cat_end box_start box_end sep eos
//   [6, 6+L)                   one token per label
//   [6+L, 6+L+4000)            role-prefixed coordinates, role*1000+value (0=x 1=y 2=w 3=h)
//   [6+L+4000, 6+L+4000+6)     doc-type tokens for the prompt header
class Vocabulary {
  public:
    enum Special : Token { CatStart = 0, CatEnd = 1, BoxStart = 2, BoxEnd = 3, Sep = 4, Eos = 5 };

    explicit Vocabulary(const Taxonomy& taxonomy);

    std::size_t size() const { return 6 + n_labels_ + 4000 + kDocTypeCount; }
    std::size_t label_count() const { return n_labels_; }
    const Taxonomy& taxonomy() const { return taxonomy_; }

    Token label_token(CategoryId c) const;
    Token coord_token(int role, int value) const;
    Token doctype_token(DocType t) const;

    bool is_special(Token t) const { return t >= 0 && t < 6; }
    bool is_label(Token t) const { return t >= 6 && t < 6 + static_cast<Token>(n_labels_); }
    bool is_coord(Token t) const {
        return t >= coord_base() && t < coord_base() + 4000;
    }
    bool is_coord_role(Token t, int role) const {
        return t >= coord_base() + role * 1000 && t < coord_base() + (role + 1) * 1000;
    }
    bool is_doctype(Token t) const {
        return t >= coord_base() + 4000 && t < static_cast<Token>(size());
    }

    CategoryId category_of(Token t) const;
    int role_of(Token t) const;
    int value_of(Token t) const;
    DocType doctype_of(Token t) const;

    std::string token_text(Token t) const;
    Token token_from_text(const std::string& text) const;

    // Stable content hash; used to pin persisted models to their taxonomy.
    std::uint64_t hash() const { return hash_; }

  private:
    Token coord_base() const { return 6 + static_cast<Token>(n_labels_); }

    Taxonomy taxonomy_;
    std::size_t n_labels_;
    std::uint64_t hash_;
};

struct PromptHeader {
    DocType doc_type = DocType::Textbook;
    int canvas_w = 0, canvas_h = 0;
    int bbox_count = 0;
    std::vector<CategoryId> valid_categories;
};

// Partial element tuple; absent field groups are simply omitted from the frame.
struct ConditionTuple {
    std::optional<CategoryId> category;
    std::optional<std::pair<int, int>> size;  // quantized (qw, qh)
    std::optional<std::pair<int, int>> pos;   // quantized (qx, qy)
};

using ConditionList = std::vector<ConditionTuple>;

// Per element: cat_start c cat_end box_start 0x 1y 2w 3h box_end; eos at the end.
TokenSequence encode_layout(const Layout& layout, const Vocabulary& vocab);

enum class DecodeMode { Strict, Lenient };

struct DecodeResult {
    Layout layout;
    std::vector<std::string> diagnostics;
};

// Inverse of encode_layout. Strict mode rejects any grammar deviation;
// lenient mode drops the malformed fragment and resynchronizes at the next
// cat_start. Boxes come back at bin centers.
DecodeResult decode_layout(const TokenSequence& seq, const Vocabulary& vocab, DecodeMode mode);

// header tokens, sep, condition tuples as partial frames, sep.
TokenSequence build_prompt(const PromptHeader& header, const ConditionList& condition,
                           const Vocabulary& vocab);

std::string tokens_to_text(const TokenSequence& seq, const Vocabulary& vocab);
TokenSequence tokens_from_text(const std::string& text, const Vocabulary& vocab);

}  // namespace doclayout
