#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "doclayout/core.hpp"

namespace doclayout {

enum class Granularity { Coarse, Fine };

// Ordered label set. Labels are unique, non-empty, lowercase-normalized.
class Taxonomy {
  public:
    Taxonomy() = default;
    Taxonomy(std::string name, std::vector<std::string> labels, Granularity granularity);

    const std::string& name() const { return name_; }
    Granularity granularity() const { return granularity_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }

    const std::string& label(CategoryId id) const;
    CategoryId id_of(const std::string& label) const;  // throws UnknownLabelError
    bool contains(const std::string& label) const;

    // The ten-label coarse set used when no taxonomy file is given.
    static Taxonomy default_coarse();

  private:
    std::string name_;
    std::vector<std::string> labels_;
    std::map<std::string, std::uint16_t> index_;
    Granularity granularity_ = Granularity::Coarse;
};

struct MapValidation {
    std::vector<std::string> overlaps;     // fine labels claimed by >1 coarse label
    std::vector<std::string> uncovered;    // fine labels in no expansion
    std::vector<std::string> empty_expansions;  // coarse labels expanding to nothing

    bool valid() const { return overlaps.empty() && uncovered.empty() && empty_expansions.empty(); }
};

// Coarse/fine label sets plus the expansion partition coarse -> {fine...}.
class LabelMap {
  public:
    LabelMap(Taxonomy coarse, Taxonomy fine,
             std::map<std::string, std::vector<std::string>> expansion);

    const Taxonomy& coarse() const { return coarse_; }
    const Taxonomy& fine() const { return fine_; }
    const std::map<std::string, std::vector<std::string>>& expansion() const { return expansion_; }

    MapValidation validate() const;

    // Report-only check; usable before construction (which rejects invalid maps).
    static MapValidation validate_parts(const Taxonomy& coarse, const Taxonomy& fine,
                                        const std::map<std::string, std::vector<std::string>>& expansion);

    // Unique coarse parent of a fine label. Requires a valid (partitioning) map.
    CategoryId coarsen(CategoryId fine_id) const;
    std::string coarsen(const std::string& fine_label) const;

    // Remaps element categories fine -> coarse; geometry and order untouched.
    Layout project_layout(const Layout& layout) const;

    // Identity map over a single taxonomy (fine = coarse, singleton expansions).
    static LabelMap identity(const Taxonomy& taxonomy);

    // JSON object {"coarse": [...], "fine": [...], "expansion": {...}}.
    static LabelMap from_json_text(const std::string& text);
    static LabelMap load(const std::string& path);
    std::string to_json_text() const;

  private:
    Taxonomy coarse_;
    Taxonomy fine_;
    std::map<std::string, std::vector<std::string>> expansion_;
    std::vector<int> fine_to_coarse_;  // -1 where unmapped
};

}  // namespace doclayout
