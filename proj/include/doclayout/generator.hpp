#pragma once

#include <random>
#include <unordered_map>

#include "doclayout/serialization.hpp"
#include "doclayout/tasks.hpp"

namespace doclayout {

// Counts over the quantized coordinate values, per role and category; feeds
// the refinement snap.
class CoordHistogram {
  public:
    CoordHistogram() = default;
    explicit CoordHistogram(std::size_t n_labels) : n_labels_(n_labels), counts_(4 * n_labels * 1000, 0) {}

    void add(int role, CategoryId cat, int value, std::uint64_t n = 1) {
        counts_.at(index(role, cat, value)) += n;
    }
    std::uint64_t count(int role, CategoryId cat, int value) const {
        return counts_.at(index(role, cat, value));
    }
    std::size_t label_count() const { return n_labels_; }

    // argmax over bins in [v-delta, v+delta]; ties to the bin nearest v, then
    // to the smaller value. All-zero window leaves v in place.
    int snap(int role, CategoryId cat, int v, int delta) const;

    const std::vector<std::uint64_t>& raw() const { return counts_; }
    std::vector<std::uint64_t>& raw() { return counts_; }

  private:
    std::size_t index(int role, CategoryId cat, int value) const {
        return (static_cast<std::size_t>(role) * n_labels_ + cat.id) * 1000 + value;
    }
    std::size_t n_labels_ = 0;
    std::vector<std::uint64_t> counts_;
};

// Interpolated additive-smoothed n-gram over the serialization vocabulary.
class NGramModel {
  public:
    NGramModel() = default;
    NGramModel(const Vocabulary& vocab, int order, double alpha);

    int order() const { return order_; }
    double alpha() const { return alpha_; }
    std::uint64_t vocab_hash() const { return vocab_hash_; }
    std::size_t vocab_size() const { return vocab_size_; }

    void observe(const TokenSequence& seq);

    // Interpolated probability, uniform weights over context lengths 0..k-1.
    double prob(const std::vector<Token>& context, Token t) const;

    // Batch prob() over an ascending candidate list; one context lookup per
    // interpolation level instead of one per candidate.
    void probs(const std::vector<Token>& context, const std::vector<Token>& choices,
               std::vector<double>& out) const;

    std::string to_json() const;
    static NGramModel from_json(const std::string& text);

  private:
    struct ContextCounts {
        std::uint64_t total = 0;
        std::unordered_map<Token, std::uint64_t> by_token;
    };
    static std::string key_of(const Token* begin, std::size_t len);

    int order_ = 4;
    double alpha_ = 0.1;
    std::uint64_t vocab_hash_ = 0;
    std::size_t vocab_size_ = 0;
    std::vector<std::unordered_map<std::string, ContextCounts>> tables_;  // one per context length
};

struct TrainedGenerator {
    NGramModel model;
    CoordHistogram histogram;
};

// One streaming pass over encoded layouts; histograms keyed by the element's
// category token.
TrainedGenerator train(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                       int order = 4, double alpha = 0.1);

struct SamplingParams {
    bool greedy = true;
    double temperature = 1.0;
    int top_k = 0;  // 0 = unrestricted
};

// Grammar- and constraint-masked autoregressive decoding. The output always
// strict-parses and satisfies the regime's forced fields exactly. Refinement
// instances are handled by refine(), not here.
Layout generate(const NGramModel& model, const Vocabulary& vocab, const PromptHeader& header,
                const ConditionList& condition, TaskKind kind, const SamplingParams& sampling,
                std::mt19937_64& rng);

// Snaps each quantized coordinate to the histogram mode within +-delta.
Layout refine(const CoordHistogram& histogram, const Layout& noisy, int delta = 30);

// exp of mean negative log masked probability per token.
double perplexity(const NGramModel& model, const Vocabulary& vocab,
                  const std::vector<TokenSequence>& corpus);

void save_generator(const TrainedGenerator& gen, const std::string& path);
TrainedGenerator load_generator(const std::string& path, const Vocabulary& vocab);

}  // namespace doclayout
