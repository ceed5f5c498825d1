#include "doclayout/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "doclayout/metrics.hpp"

namespace doclayout {

LayoutRecord record_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    LayoutRecord r;
    r.id = j.at("id").get<std::string>();
    r.doc_type = j.at("doc_type").get<std::string>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    if (j.contains("source")) r.source = j["source"].get<std::string>();
    for (const auto& je : j.at("elements")) {
        RecordElement e;
        e.category = je.at("category").get<std::string>();
        const auto& bb = je.at("bbox");
        if (!bb.is_array() || bb.size() != 4) throw std::runtime_error("bbox must be [x,y,w,h]");
        e.x = bb[0].get<double>();
        e.y = bb[1].get<double>();
        e.w = bb[2].get<double>();
        e.h = bb[3].get<double>();
        e.order = je.value("order", static_cast<int>(r.elements.size()));
        r.elements.push_back(std::move(e));
    }
    return r;
}

std::string record_to_json_line(const LayoutRecord& record) {
    nlohmann::ordered_json j;
    j["id"] = record.id;
    j["doc_type"] = record.doc_type;
    j["width"] = record.width;
    j["height"] = record.height;
    j["elements"] = nlohmann::ordered_json::array();
    for (const auto& e : record.elements) {
        j["elements"].push_back({{"category", e.category},
                                 {"bbox", {e.x, e.y, e.w, e.h}},
                                 {"order", e.order}});
    }
    if (!record.source.empty()) j["source"] = record.source;
    return j.dump();
}

Layout record_to_layout(const LayoutRecord& record, const Taxonomy& taxonomy) {
    auto dt = doc_type_from_string(record.doc_type);
    if (!dt) throw std::runtime_error("unknown doc_type '" + record.doc_type + "'");
    RawLayout raw;
    raw.id = record.id;
    raw.doc_type = *dt;
    raw.canvas_w = record.width;
    raw.canvas_h = record.height;
    std::vector<const RecordElement*> sorted;
    for (const auto& e : record.elements) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RecordElement* a, const RecordElement* b) { return a->order < b->order; });
    for (const RecordElement* e : sorted)
        raw.boxes.push_back(RawBox{e->category, e->x, e->y, e->w, e->h});
    return normalize_layout(raw, [&](const std::string& label, int idx) {
               try {
                   return taxonomy.id_of(label);
               } catch (const UnknownLabelError&) {
                   throw UnknownLabelError(label, idx);
               }
           })
        .layout;
}

LayoutRecord layout_to_record(const Layout& layout, const Taxonomy& taxonomy) {
    LayoutRecord r;
    r.id = layout.id;
    r.doc_type = to_string(layout.doc_type);
    r.width = layout.canvas_w;
    r.height = layout.canvas_h;
    int order = 0;
    for (const Element& e : layout.elements) {
        RecordElement re;
        re.category = taxonomy.label(e.category);
        re.x = e.bbox.x * layout.canvas_w;
        re.y = e.bbox.y * layout.canvas_h;
        re.w = e.bbox.w * layout.canvas_w;
        re.h = e.bbox.h * layout.canvas_h;
        re.order = order++;
        r.elements.push_back(std::move(re));
    }
    return r;
}

namespace {

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv_str(std::uint64_t h, const std::string& s) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t dedup_key(const LayoutRecord& record) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv_str(h, record.doc_type);
    std::vector<const RecordElement*> sorted;
    for (const auto& e : record.elements) sorted.push_back(&e);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RecordElement* a, const RecordElement* b) { return a->order < b->order; });
    for (const RecordElement* e : sorted) {
        h = fnv_str(h, e->category);
        auto qc = [&](double v, int canvas) {
            double norm = std::clamp(v / canvas, 0.0, 1.0);
            return static_cast<std::uint64_t>(quantize(norm));
        };
        h = fnv_mix(h, qc(e->x, record.width));
        h = fnv_mix(h, qc(e->y, record.height));
        h = fnv_mix(h, qc(e->w, record.width));
        h = fnv_mix(h, qc(e->h, record.height));
    }
    return h;
}

void Ingestor::run(std::istream& in,
                   const std::function<void(const Layout&, const LayoutRecord&)>& on_accept,
                   const std::function<void(const Rejection&)>& on_reject) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no_;
        if (line.empty()) continue;
        auto reject = [&](const std::string& id, const std::string& reason) {
            ++stats_.rejected_by_reason[reason];
            on_reject(Rejection{line_no_, id, reason});
        };
        LayoutRecord rec;
        try {
            rec = record_from_json_line(line);
        } catch (const std::exception&) {
            reject("", "malformed");
            continue;
        }
        if (!doc_type_from_string(rec.doc_type)) {
            reject(rec.id, "bad-doc-type");
            continue;
        }
        if (rec.width <= 0 || rec.height <= 0) {
            reject(rec.id, "bad-geometry");
            continue;
        }
        if (rec.elements.empty() || static_cast<int>(rec.elements.size()) > opts_.max_elements) {
            reject(rec.id, rec.elements.empty() ? "empty" : "count-bounds");
            continue;
        }
        if (seen_ids_.count(rec.id)) {
            reject(rec.id, "duplicate");
            continue;
        }
        if (opts_.require_known_category) {
            bool unknown = false;
            for (const auto& e : rec.elements)
                if (!taxonomy_.contains(e.category)) { unknown = true; break; }
            if (unknown) {
                reject(rec.id, "unknown-category");
                continue;
            }
        }
        Layout layout;
        try {
            layout = record_to_layout(rec, taxonomy_);
        } catch (const EmptyLayoutError&) {
            reject(rec.id, "empty");
            continue;
        } catch (const std::exception&) {
            reject(rec.id, "bad-geometry");
            continue;
        }
        if (opts_.dedup) {
            std::uint64_t key = dedup_key(rec);
            if (!seen_keys_.insert(key).second) {
                reject(rec.id, "duplicate");
                continue;
            }
        }
        seen_ids_.insert(rec.id);
        ++stats_.accepted;
        on_accept(layout, rec);
    }
}

void CorpusStats::add(const Layout& layout, const Taxonomy& taxonomy) {
    ++pages;
    ++pages_per_doc_type[to_string(layout.doc_type)];
    ++element_count_hist[static_cast<int>(layout.elements.size())];
    double area = 0;
    for (const Element& e : layout.elements) {
        area += e.bbox.area();
        double ratio = std::log2(e.bbox.w / e.bbox.h);
        int bin = static_cast<int>(std::floor(std::clamp(ratio, -5.0, 5.0) / kAspectBin));
        ++aspect_ratio_hist[bin];
        ++category_by_doc_type[to_string(layout.doc_type)][taxonomy.label(e.category)];
        ++elements;
    }
    ++area_ratio_hist[static_cast<int>(std::floor(std::min(area, 2.0) / kAreaRatioBin))];
}

void CorpusStats::merge(const CorpusStats& other) {
    pages += other.pages;
    elements += other.elements;
    for (auto& [k, v] : other.pages_per_doc_type) pages_per_doc_type[k] += v;
    for (auto& [k, v] : other.element_count_hist) element_count_hist[k] += v;
    for (auto& [k, v] : other.area_ratio_hist) area_ratio_hist[k] += v;
    for (auto& [k, v] : other.aspect_ratio_hist) aspect_ratio_hist[k] += v;
    for (auto& [dt, m] : other.category_by_doc_type)
        for (auto& [cat, v] : m) category_by_doc_type[dt][cat] += v;
}

std::string CorpusStats::to_json() const {
    nlohmann::ordered_json j;
    j["pages"] = pages;
    j["elements"] = elements;
    j["pages_per_doc_type"] = pages_per_doc_type;
    auto int_hist = [](const std::map<int, std::uint64_t>& h) {
        nlohmann::ordered_json out = nlohmann::ordered_json::object();
        for (auto& [k, v] : h) out[std::to_string(k)] = v;
        return out;
    };
    j["element_count_hist"] = int_hist(element_count_hist);
    j["area_ratio_hist"] = int_hist(area_ratio_hist);
    j["aspect_ratio_hist"] = int_hist(aspect_ratio_hist);
    j["category_by_doc_type"] = category_by_doc_type;
    return j.dump(2);
}

std::uint64_t export_features(const std::vector<Layout>& layouts, const Taxonomy& taxonomy,
                              std::ostream& out) {
    out << "id,doc_type,element_count,mean_area,mean_cx,mean_cy";
    for (int i = 0; i < kFeatureBaseDim; ++i) out << ",f" << i;
    for (const auto& l : taxonomy.labels()) out << ",cat_" << l;
    out << '\n';
    std::uint64_t rows = 0;
    for (const Layout& l : layouts) {
        double area = 0, cx = 0, cy = 0;
        for (const Element& e : l.elements) {
            area += e.bbox.area();
            cx += e.bbox.cx();
            cy += e.bbox.cy();
        }
        double n = static_cast<double>(l.elements.size());
        out << l.id << ',' << to_string(l.doc_type) << ',' << l.elements.size() << ',' << area / n
            << ',' << cx / n << ',' << cy / n;
        for (double f : extract_features(l, taxonomy)) out << ',' << f;
        out << '\n';
        ++rows;
    }
    return rows;
}

}  // namespace doclayout
