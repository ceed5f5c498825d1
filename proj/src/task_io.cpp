#include <json.hpp>

#include "doclayout/tasks.hpp"

namespace doclayout {

std::string task_to_json_line(const TaskInstance& inst, const Taxonomy& taxonomy) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(inst.kind);
    j["seed"] = inst.seed;
    nlohmann::ordered_json hdr;
    hdr["doc_type"] = to_string(inst.header.doc_type);
    hdr["canvas_w"] = inst.header.canvas_w;
    hdr["canvas_h"] = inst.header.canvas_h;
    hdr["bbox_count"] = inst.header.bbox_count;
    hdr["valid_categories"] = nlohmann::ordered_json::array();
    for (CategoryId c : inst.header.valid_categories)
        hdr["valid_categories"].push_back(taxonomy.label(c));
    j["header"] = hdr;
    j["condition"] = nlohmann::ordered_json::array();
    for (const ConditionTuple& t : inst.condition) {
        nlohmann::ordered_json tj = nlohmann::ordered_json::object();
        if (t.category) tj["category"] = taxonomy.label(*t.category);
        if (t.pos) tj["pos"] = {t.pos->first, t.pos->second};
        if (t.size) tj["size"] = {t.size->first, t.size->second};
        j["condition"].push_back(tj);
    }
    nlohmann::ordered_json tgt;
    tgt["id"] = inst.target.id;
    tgt["doc_type"] = to_string(inst.target.doc_type);
    tgt["canvas_w"] = inst.target.canvas_w;
    tgt["canvas_h"] = inst.target.canvas_h;
    tgt["elements"] = nlohmann::ordered_json::array();
    for (const Element& e : inst.target.elements)
        tgt["elements"].push_back({{"category", taxonomy.label(e.category)},
                                   {"bbox", {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}}});
    j["target"] = tgt;
    return j.dump();
}

TaskInstance task_from_json_line(const std::string& line, const Taxonomy& taxonomy) {
    nlohmann::json j = nlohmann::json::parse(line);
    TaskInstance inst;
    auto kind = task_kind_from_string(j.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown task kind");
    inst.kind = *kind;
    inst.seed = j.value("seed", std::uint64_t{0});
    const auto& hdr = j.at("header");
    auto dt = doc_type_from_string(hdr.at("doc_type").get<std::string>());
    if (!dt) throw std::runtime_error("unknown doc_type");
    inst.header.doc_type = *dt;
    inst.header.canvas_w = hdr.at("canvas_w").get<int>();
    inst.header.canvas_h = hdr.at("canvas_h").get<int>();
    inst.header.bbox_count = hdr.at("bbox_count").get<int>();
    for (const auto& l : hdr.at("valid_categories"))
        inst.header.valid_categories.push_back(taxonomy.id_of(l.get<std::string>()));
    for (const auto& tj : j.at("condition")) {
        ConditionTuple t;
        if (tj.contains("category")) t.category = taxonomy.id_of(tj["category"].get<std::string>());
        if (tj.contains("pos")) t.pos = {tj["pos"][0].get<int>(), tj["pos"][1].get<int>()};
        if (tj.contains("size")) t.size = {tj["size"][0].get<int>(), tj["size"][1].get<int>()};
        inst.condition.push_back(t);
    }
    const auto& tgt = j.at("target");
    inst.target.id = tgt.at("id").get<std::string>();
    auto tdt = doc_type_from_string(tgt.at("doc_type").get<std::string>());
    if (!tdt) throw std::runtime_error("unknown doc_type");
    inst.target.doc_type = *tdt;
    inst.target.canvas_w = tgt.at("canvas_w").get<int>();
    inst.target.canvas_h = tgt.at("canvas_h").get<int>();
    for (const auto& ej : tgt.at("elements")) {
        Element e;
        e.category = taxonomy.id_of(ej.at("category").get<std::string>());
        const auto& bb = ej.at("bbox");
        e.bbox = BBox{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                      bb[3].get<double>()};
        inst.target.elements.push_back(e);
    }
    return inst;
}

}  // namespace doclayout
