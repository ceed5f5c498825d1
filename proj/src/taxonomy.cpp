#include "doclayout/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace doclayout {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

Taxonomy::Taxonomy(std::string name, std::vector<std::string> labels, Granularity granularity)
    : name_(std::move(name)), granularity_(granularity) {
    labels_.reserve(labels.size());
    for (auto& raw : labels) {
        std::string l = lowercase(raw);
        if (l.empty())
            throw std::invalid_argument("taxonomy '" + name_ + "': empty label");
        if (l.find_first_of(" \t\n") != std::string::npos)
            throw std::invalid_argument("taxonomy '" + name_ + "': label contains whitespace: '" + l + "'");
        if (std::isdigit(static_cast<unsigned char>(l[0])))
            throw std::invalid_argument("taxonomy '" + name_ + "': label may not start with a digit: '" + l + "'");
        if (index_.count(l))
            throw std::invalid_argument("taxonomy '" + name_ + "': duplicate label '" + l + "'");
        index_[l] = static_cast<std::uint16_t>(labels_.size());
        labels_.push_back(std::move(l));
    }
}

const std::string& Taxonomy::label(CategoryId id) const {
    if (id.id >= labels_.size())
        throw std::out_of_range("taxonomy '" + name_ + "': id " + std::to_string(id.id) + " out of range");
    return labels_[id.id];
}

CategoryId Taxonomy::id_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw UnknownLabelError(label);
    return CategoryId{it->second};
}

bool Taxonomy::contains(const std::string& label) const { return index_.count(label) != 0; }

Taxonomy Taxonomy::default_coarse() {
    return Taxonomy("coarse",
                    {"text", "title", "image", "table", "formula", "caption", "footnote", "list",
                     "page_header", "page_footer"},
                    Granularity::Coarse);
}

LabelMap::LabelMap(Taxonomy coarse, Taxonomy fine,
                   std::map<std::string, std::vector<std::string>> expansion)
    : coarse_(std::move(coarse)), fine_(std::move(fine)), expansion_(std::move(expansion)) {
    MapValidation v = validate();
    if (!v.valid()) {
        std::ostringstream msg;
        msg << "label map is not a partition:";
        for (const auto& l : v.overlaps) msg << " overlap=" << l;
        for (const auto& l : v.uncovered) msg << " uncovered=" << l;
        for (const auto& l : v.empty_expansions) msg << " empty=" << l;
        throw std::invalid_argument(msg.str());
    }
    fine_to_coarse_.assign(fine_.size(), -1);
    for (const auto& [coarse_label, fines] : expansion_) {
        int cid = coarse_.id_of(coarse_label).id;
        for (const auto& f : fines) fine_to_coarse_[fine_.id_of(f).id] = cid;
    }
}

MapValidation LabelMap::validate() const { return validate_parts(coarse_, fine_, expansion_); }

MapValidation LabelMap::validate_parts(const Taxonomy& coarse, const Taxonomy& fine,
                                       const std::map<std::string, std::vector<std::string>>& expansion) {
    MapValidation out;
    std::map<std::string, int> seen;
    for (const auto& [coarse_label, fines] : expansion) {
        if (!coarse.contains(coarse_label)) out.uncovered.push_back("?" + coarse_label);
        if (fines.empty()) out.empty_expansions.push_back(coarse_label);
        for (const auto& f : fines)
            if (++seen[f] == 2) out.overlaps.push_back(f);
    }
    for (const auto& c : coarse.labels())
        if (!expansion.count(c)) out.empty_expansions.push_back(c);
    for (const auto& f : fine.labels())
        if (!seen.count(f)) out.uncovered.push_back(f);
    return out;
}

CategoryId LabelMap::coarsen(CategoryId fine_id) const {
    if (fine_id.id >= fine_to_coarse_.size() || fine_to_coarse_[fine_id.id] < 0)
        throw UnknownLabelError("fine id " + std::to_string(fine_id.id));
    return CategoryId{static_cast<std::uint16_t>(fine_to_coarse_[fine_id.id])};
}

std::string LabelMap::coarsen(const std::string& fine_label) const {
    return coarse_.label(coarsen(fine_.id_of(fine_label)));
}

Layout LabelMap::project_layout(const Layout& layout) const {
    Layout out = layout;
    for (std::size_t i = 0; i < out.elements.size(); ++i) {
        try {
            out.elements[i].category = coarsen(out.elements[i].category);
        } catch (const UnknownLabelError& e) {
            throw UnknownLabelError(e.label, static_cast<int>(i));
        }
    }
    return out;
}

LabelMap LabelMap::identity(const Taxonomy& taxonomy) {
    std::map<std::string, std::vector<std::string>> expansion;
    for (const auto& l : taxonomy.labels()) expansion[l] = {l};
    Taxonomy coarse(taxonomy.name(), taxonomy.labels(), Granularity::Coarse);
    Taxonomy fine(taxonomy.name(), taxonomy.labels(), Granularity::Fine);
    return LabelMap(std::move(coarse), std::move(fine), std::move(expansion));
}

LabelMap LabelMap::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Taxonomy coarse("coarse", j.at("coarse").get<std::vector<std::string>>(), Granularity::Coarse);
    Taxonomy fine("fine", j.at("fine").get<std::vector<std::string>>(), Granularity::Fine);
    std::map<std::string, std::vector<std::string>> expansion;
    for (auto& [k, v] : j.at("expansion").items())
        expansion[k] = v.get<std::vector<std::string>>();
    return LabelMap(std::move(coarse), std::move(fine), std::move(expansion));
}

LabelMap LabelMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label map: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string LabelMap::to_json_text() const {
    nlohmann::ordered_json j;
    j["coarse"] = coarse_.labels();
    j["fine"] = fine_.labels();
    j["expansion"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : expansion_) j["expansion"][k] = v;
    return j.dump(2);
}

}  // namespace doclayout
