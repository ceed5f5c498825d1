#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "doclayout/core.hpp"
#include "doclayout/taxonomy.hpp"

namespace doclayout {

// On-disk element: absolute pixels plus an explicit reading-order index.
struct RecordElement {
    std::string category;
    double x = 0, y = 0, w = 0, h = 0;
    int order = 0;
};

struct LayoutRecord {
    std::string id;
    std::string doc_type;
    int width = 0, height = 0;
    std::vector<RecordElement> elements;
    std::string source;
};

// One JSON object per line:
// {"id":..,"doc_type":..,"width":..,"height":..,"elements":[{"category":..,"bbox":[x,y,w,h],"order":..}]}
LayoutRecord record_from_json_line(const std::string& line);
std::string record_to_json_line(const LayoutRecord& record);

// Sorts by reading order, normalizes to the unit canvas, resolves categories.
Layout record_to_layout(const LayoutRecord& record, const Taxonomy& taxonomy);
LayoutRecord layout_to_record(const Layout& layout, const Taxonomy& taxonomy);

// Stable 64-bit hash over (doc_type, quantized element tuples in reading
// order); layouts identical up to sub-bin jitter collide by construction.
std::uint64_t dedup_key(const LayoutRecord& record);

struct IngestOptions {
    int max_elements = kDefaultMaxElements;
    bool dedup = true;
    bool require_known_category = true;
};

struct Rejection {
    std::size_t line_no = 0;
    std::string id;
    std::string reason;  // malformed, bad-geometry, unknown-category, duplicate, empty, count-bounds, bad-doc-type
};

struct IngestStats {
    std::uint64_t accepted = 0;
    std::map<std::string, std::uint64_t> rejected_by_reason;

    std::uint64_t rejected() const {
        std::uint64_t n = 0;
        for (auto& [_, c] : rejected_by_reason) n += c;
        return n;
    }
};

// Streams line-delimited records through validation + dedup. Accepted records
// go to on_accept (already normalized); rejections go to on_reject. Never
// throws on bad lines; only on unreadable streams.
class Ingestor {
  public:
    Ingestor(const Taxonomy& taxonomy, IngestOptions opts) : taxonomy_(taxonomy), opts_(opts) {}

    void run(std::istream& in,
             const std::function<void(const Layout&, const LayoutRecord&)>& on_accept,
             const std::function<void(const Rejection&)>& on_reject);

    const IngestStats& stats() const { return stats_; }

  private:
    const Taxonomy& taxonomy_;
    IngestOptions opts_;
    IngestStats stats_;
    std::unordered_set<std::uint64_t> seen_keys_;
    std::unordered_set<std::string> seen_ids_;
    std::size_t line_no_ = 0;
};

struct CorpusStats {
    std::map<std::string, std::uint64_t> pages_per_doc_type;
    std::map<int, std::uint64_t> element_count_hist;
    std::map<int, std::uint64_t> area_ratio_hist;    // total element area / page area, bins of 0.05
    std::map<int, std::uint64_t> aspect_ratio_hist;  // log2(w/h), bins of 0.25, clamped to [-5,5]
    std::map<std::string, std::map<std::string, std::uint64_t>> category_by_doc_type;
    std::uint64_t pages = 0;
    std::uint64_t elements = 0;

    void add(const Layout& layout, const Taxonomy& taxonomy);
    void merge(const CorpusStats& other);
    std::string to_json() const;
};

inline constexpr double kAreaRatioBin = 0.05;
inline constexpr double kAspectBin = 0.25;

// Per-page CSV rows: id, doc_type, count, mean area, mean centroid, then the
// metric feature vector. Streams; row count equals layouts seen.
std::uint64_t export_features(const std::vector<Layout>& layouts, const Taxonomy& taxonomy,
                              std::ostream& out);

}  // namespace doclayout
