#include "doclayout/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace doclayout {

int CoordHistogram::snap(int role, CategoryId cat, int v, int delta) const {
    int lo = std::max(0, v - delta), hi = std::min(999, v + delta);
    int best = v;
    std::uint64_t best_count = 0;
    for (int b = lo; b <= hi; ++b) {
        std::uint64_t c = count(role, cat, b);
        if (c == 0) continue;
        if (c > best_count) {
            best = b;
            best_count = c;
        } else if (c == best_count) {
            int db = std::abs(b - v), dbest = std::abs(best - v);
            if (db < dbest || (db == dbest && b < best)) best = b;
        }
    }
    return best_count > 0 ? best : v;
}

NGramModel::NGramModel(const Vocabulary& vocab, int order, double alpha)
    : order_(order), alpha_(alpha), vocab_hash_(vocab.hash()), vocab_size_(vocab.size()) {
    if (order < 2) throw std::domain_error("ngram order must be >= 2");
    if (alpha <= 0) throw std::domain_error("smoothing alpha must be > 0");
    tables_.resize(order_);
}

std::string NGramModel::key_of(const Token* begin, std::size_t len) {
    std::string key(len * 2, '\0');
    for (std::size_t i = 0; i < len; ++i) {
        key[2 * i] = static_cast<char>(begin[i] & 0xff);
        key[2 * i + 1] = static_cast<char>((begin[i] >> 8) & 0xff);
    }
    return key;
}

void NGramModel::observe(const TokenSequence& seq) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        for (int m = 0; m < order_; ++m) {
            if (static_cast<std::size_t>(m) > i) break;
            ContextCounts& cc = tables_[m][key_of(seq.data() + i - m, m)];
            ++cc.total;
            ++cc.by_token[seq[i]];
        }
    }
}

double NGramModel::prob(const std::vector<Token>& context, Token t) const {
    double p = 0;
    const double v = static_cast<double>(vocab_size_);
    for (int m = 0; m < order_; ++m) {
        std::uint64_t ctx_total = 0, tok_count = 0;
        if (static_cast<std::size_t>(m) <= context.size()) {
            auto it = tables_[m].find(key_of(context.data() + context.size() - m, m));
            if (it != tables_[m].end()) {
                ctx_total = it->second.total;
                auto jt = it->second.by_token.find(t);
                if (jt != it->second.by_token.end()) tok_count = jt->second;
            }
        }
        p += (static_cast<double>(tok_count) + alpha_) / (static_cast<double>(ctx_total) + alpha_ * v);
    }
    return p / order_;
}

void NGramModel::probs(const std::vector<Token>& context, const std::vector<Token>& choices,
                       std::vector<double>& out) const {
    const double v = static_cast<double>(vocab_size_);
    out.assign(choices.size(), 0.0);
    double floor_mass = 0;  // the alpha terms are identical for every candidate
    for (int m = 0; m < order_; ++m) {
        const ContextCounts* cc = nullptr;
        if (static_cast<std::size_t>(m) <= context.size()) {
            auto it = tables_[m].find(key_of(context.data() + context.size() - m, m));
            if (it != tables_[m].end()) cc = &it->second;
        }
        double denom = (cc ? static_cast<double>(cc->total) : 0.0) + alpha_ * v;
        floor_mass += alpha_ / denom;
        if (!cc) continue;
        for (const auto& [tok, c] : cc->by_token) {
            auto pos = std::lower_bound(choices.begin(), choices.end(), tok);
            if (pos != choices.end() && *pos == tok)
                out[pos - choices.begin()] += static_cast<double>(c) / denom;
        }
    }
    for (double& p : out) p = (p + floor_mass) / order_;
}

TrainedGenerator train(const std::vector<TokenSequence>& corpus, const Vocabulary& vocab,
                       int order, double alpha) {
    if (corpus.empty()) throw std::domain_error("train: empty corpus");
    TrainedGenerator gen{NGramModel(vocab, order, alpha), CoordHistogram(vocab.label_count())};
    for (const TokenSequence& seq : corpus) {
        gen.model.observe(seq);
        CategoryId cur{0};
        bool have_cat = false;
        for (Token t : seq) {
            if (vocab.is_label(t)) {
                cur = vocab.category_of(t);
                have_cat = true;
            } else if (vocab.is_coord(t) && have_cat) {
                gen.histogram.add(vocab.role_of(t), cur, vocab.value_of(t));
            }
        }
    }
    return gen;
}

namespace {

enum class GState { CatStartOrEos, Cat, CatEnd, BoxStart, X, Y, W, H, BoxEnd };

// Valid-token set for a free (unforced) step.
void free_choices(GState state, const Vocabulary& vocab, std::vector<Token>& out) {
    out.clear();
    switch (state) {
        case GState::Cat:
            for (std::size_t i = 0; i < vocab.label_count(); ++i)
                out.push_back(vocab.label_token(CategoryId{static_cast<std::uint16_t>(i)}));
            break;
        case GState::X:
        case GState::Y:
        case GState::W:
        case GState::H: {
            int role = static_cast<int>(state) - static_cast<int>(GState::X);
            for (int v = 0; v < 1000; ++v) out.push_back(vocab.coord_token(role, v));
            break;
        }
        default:
            throw std::logic_error("free_choices: state has a forced token");
    }
}

Token sample_masked(const NGramModel& model, const std::vector<Token>& context,
                    const std::vector<Token>& choices, const SamplingParams& sampling,
                    std::mt19937_64& rng) {
    std::vector<double> probs;
    model.probs(context, choices, probs);
    if (sampling.greedy) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < choices.size(); ++i)
            if (probs[i] > probs[best]) best = i;
        return choices[best];
    }
    std::vector<std::size_t> idx(choices.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (sampling.top_k > 0 && static_cast<std::size_t>(sampling.top_k) < idx.size()) {
        std::partial_sort(idx.begin(), idx.begin() + sampling.top_k, idx.end(),
                          [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
        idx.resize(sampling.top_k);
    }
    std::vector<double> w(idx.size());
    double t = sampling.temperature > 0 ? sampling.temperature : 1.0;
    if (t == 1.0)
        for (std::size_t i = 0; i < idx.size(); ++i) w[i] = probs[idx[i]];
    else
        for (std::size_t i = 0; i < idx.size(); ++i) w[i] = std::pow(probs[idx[i]], 1.0 / t);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    return choices[idx[pick(rng)]];
}

}  // namespace

Layout generate(const NGramModel& model, const Vocabulary& vocab, const PromptHeader& header,
                const ConditionList& condition, TaskKind kind, const SamplingParams& sampling,
                std::mt19937_64& rng) {
    if (kind == TaskKind::Refinement)
        throw std::invalid_argument("generate: refinement is handled by refine()");
    if (header.bbox_count < 1) throw std::domain_error("generate: bbox_count must be >= 1");
    const std::size_t n = static_cast<std::size_t>(header.bbox_count);
    if ((kind == TaskKind::CtoSP || kind == TaskKind::CStoP) && condition.size() != n)
        throw ConditionMismatchError("generate: condition length " + std::to_string(condition.size()) +
                                     " != bbox_count " + std::to_string(n));
    if (kind == TaskKind::Completion && condition.size() > n)
        throw ConditionMismatchError("generate: completion prefix longer than bbox_count");

    TokenSequence seq;
    std::vector<Token> choices;
    GState state = GState::CatStartOrEos;
    std::size_t emitted = 0;  // completed elements
    bool done = false;

    auto forced_for = [&](GState s) -> std::optional<Token> {
        const bool in_condition =
            (kind == TaskKind::CtoSP || kind == TaskKind::CStoP) ? emitted < condition.size()
            : kind == TaskKind::Completion                       ? emitted < condition.size()
                                                                 : false;
        switch (s) {
            case GState::CatStartOrEos:
                return emitted == n ? Token(Vocabulary::Eos) : Token(Vocabulary::CatStart);
            case GState::CatEnd: return Token(Vocabulary::CatEnd);
            case GState::BoxStart: return Token(Vocabulary::BoxStart);
            case GState::BoxEnd: return Token(Vocabulary::BoxEnd);
            case GState::Cat:
                if (in_condition && condition[emitted].category)
                    return vocab.label_token(*condition[emitted].category);
                return std::nullopt;
            case GState::X:
                if (kind == TaskKind::Completion && in_condition && condition[emitted].pos)
                    return vocab.coord_token(0, condition[emitted].pos->first);
                return std::nullopt;
            case GState::Y:
                if (kind == TaskKind::Completion && in_condition && condition[emitted].pos)
                    return vocab.coord_token(1, condition[emitted].pos->second);
                return std::nullopt;
            case GState::W:
                if (in_condition && condition[emitted].size &&
                    (kind == TaskKind::CStoP || kind == TaskKind::Completion))
                    return vocab.coord_token(2, condition[emitted].size->first);
                return std::nullopt;
            case GState::H:
                if (in_condition && condition[emitted].size &&
                    (kind == TaskKind::CStoP || kind == TaskKind::Completion))
                    return vocab.coord_token(3, condition[emitted].size->second);
                return std::nullopt;
        }
        return std::nullopt;
    };

    while (!done) {
        Token t;
        if (auto forced = forced_for(state)) {
            t = *forced;  // forced steps consume no randomness
        } else {
            free_choices(state, vocab, choices);
            t = sample_masked(model, seq, choices, sampling, rng);
        }
        seq.push_back(t);
        switch (state) {
            case GState::CatStartOrEos: done = (t == Vocabulary::Eos); state = done ? state : GState::Cat; break;
            case GState::Cat: state = GState::CatEnd; break;
            case GState::CatEnd: state = GState::BoxStart; break;
            case GState::BoxStart: state = GState::X; break;
            case GState::X: state = GState::Y; break;
            case GState::Y: state = GState::W; break;
            case GState::W: state = GState::H; break;
            case GState::H: state = GState::BoxEnd; break;
            case GState::BoxEnd:
                ++emitted;
                state = GState::CatStartOrEos;
                break;
        }
    }

    Layout out = decode_layout(seq, vocab, DecodeMode::Strict).layout;
    out.doc_type = header.doc_type;
    out.canvas_w = header.canvas_w;
    out.canvas_h = header.canvas_h;
    return out;
}

Layout refine(const CoordHistogram& histogram, const Layout& noisy, int delta) {
    if (delta < 0) throw std::domain_error("refine: negative delta");
    Layout out = noisy;
    for (Element& e : out.elements) {
        QBBox q = e.qbox();
        q.qx = histogram.snap(0, e.category, q.qx, delta);
        q.qy = histogram.snap(1, e.category, q.qy, delta);
        q.qw = histogram.snap(2, e.category, q.qw, delta);
        q.qh = histogram.snap(3, e.category, q.qh, delta);
        // keep the dequantized box on the page
        q.qx = std::min(q.qx, 998);
        q.qy = std::min(q.qy, 998);
        q.qw = std::clamp(q.qw, 1, 999 - q.qx);
        q.qh = std::clamp(q.qh, 1, 999 - q.qy);
        e.bbox = dequantize_box(q);
    }
    return out;
}

double perplexity(const NGramModel& model, const Vocabulary& vocab,
                  const std::vector<TokenSequence>& corpus) {
    if (corpus.empty()) throw std::domain_error("perplexity: empty corpus");
    double nll = 0;
    std::uint64_t tokens = 0;
    std::vector<Token> choices;
    for (const TokenSequence& seq : corpus) {
        GState state = GState::CatStartOrEos;
        std::vector<Token> context;
        for (Token t : seq) {
            double denom = 0, num = model.prob(context, t);
            switch (state) {
                case GState::CatStartOrEos:
                    denom = model.prob(context, Vocabulary::CatStart) +
                            model.prob(context, Vocabulary::Eos);
                    state = (t == Vocabulary::Eos) ? state : GState::Cat;
                    break;
                case GState::CatEnd:
                case GState::BoxStart:
                case GState::BoxEnd:
                    denom = num;  // single valid token
                    state = state == GState::CatEnd  ? GState::BoxStart
                            : state == GState::BoxStart ? GState::X
                                                        : GState::CatStartOrEos;
                    break;
                default: {
                    free_choices(state, vocab, choices);
                    std::vector<double> ps;
                    model.probs(context, choices, ps);
                    for (double p : ps) denom += p;
                }
                    state = state == GState::Cat ? GState::CatEnd
                            : state == GState::X ? GState::Y
                            : state == GState::Y ? GState::W
                            : state == GState::W ? GState::H
                                                 : GState::BoxEnd;
                    break;
            }
            nll += -std::log(std::max(num / denom, 1e-300));
            ++tokens;
            context.push_back(t);
        }
    }
    return std::exp(nll / static_cast<double>(tokens));
}

std::string NGramModel::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["vocab_hash"] = vocab_hash_;
    j["vocab_size"] = vocab_size_;
    j["order"] = order_;
    j["alpha"] = alpha_;
    j["tables"] = nlohmann::ordered_json::array();
    for (int m = 0; m < order_; ++m) {
        nlohmann::ordered_json tbl = nlohmann::ordered_json::array();
        // sort for byte-stable dumps
        std::vector<const std::pair<const std::string, ContextCounts>*> entries;
        for (const auto& kv : tables_[m]) entries.push_back(&kv);
        std::sort(entries.begin(), entries.end(),
                  [](auto* a, auto* b) { return a->first < b->first; });
        for (auto* kv : entries) {
            nlohmann::ordered_json ctx = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i + 1 < kv->first.size() + 1; i += 2) {
                int tok = static_cast<unsigned char>(kv->first[i]) |
                          (static_cast<unsigned char>(kv->first[i + 1]) << 8);
                ctx.push_back(tok);
            }
            std::vector<std::pair<Token, std::uint64_t>> counts(kv->second.by_token.begin(),
                                                                kv->second.by_token.end());
            std::sort(counts.begin(), counts.end());
            nlohmann::ordered_json cj = nlohmann::ordered_json::array();
            for (auto& [tok, c] : counts) cj.push_back({tok, c});
            tbl.push_back({{"ctx", ctx}, {"counts", cj}});
        }
        j["tables"].push_back(tbl);
    }
    return j.dump();
}

NGramModel NGramModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1) throw std::runtime_error("unsupported model version");
    NGramModel m;
    m.order_ = j.at("order").get<int>();
    m.alpha_ = j.at("alpha").get<double>();
    m.vocab_hash_ = j.at("vocab_hash").get<std::uint64_t>();
    m.vocab_size_ = j.at("vocab_size").get<std::size_t>();
    m.tables_.resize(m.order_);
    for (int i = 0; i < m.order_; ++i) {
        for (const auto& entry : j.at("tables")[i]) {
            std::vector<Token> ctx = entry.at("ctx").get<std::vector<Token>>();
            ContextCounts cc;
            for (const auto& pair : entry.at("counts")) {
                Token tok = pair[0].get<Token>();
                std::uint64_t c = pair[1].get<std::uint64_t>();
                cc.by_token[tok] = c;
                cc.total += c;
            }
            m.tables_[i][key_of(ctx.data(), ctx.size())] = std::move(cc);
        }
    }
    return m;
}

void save_generator(const TrainedGenerator& gen, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    nlohmann::ordered_json j;
    j["model"] = nlohmann::json::parse(gen.model.to_json());
    j["histogram"] = {{"labels", gen.histogram.label_count()}, {"counts", nlohmann::json::array()}};
    // sparse dump: [index, count] for non-zero bins
    for (std::size_t i = 0; i < gen.histogram.raw().size(); ++i)
        if (gen.histogram.raw()[i]) j["histogram"]["counts"].push_back({i, gen.histogram.raw()[i]});
    out << j.dump();
}

TrainedGenerator load_generator(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j = nlohmann::json::parse(ss.str());
    TrainedGenerator gen;
    gen.model = NGramModel::from_json(j.at("model").dump());
    if (gen.model.vocab_hash() != vocab.hash())
        throw std::runtime_error("model vocabulary hash does not match the active taxonomy");
    gen.histogram = CoordHistogram(j.at("histogram").at("labels").get<std::size_t>());
    for (const auto& pair : j.at("histogram").at("counts"))
        gen.histogram.raw().at(pair[0].get<std::size_t>()) = pair[1].get<std::uint64_t>();
    return gen;
}

}  // namespace doclayout
