#include "doclayout/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace doclayout {

const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::UCond: return "u_cond";
        case TaskKind::CtoSP: return "c_to_sp";
        case TaskKind::CStoP: return "cs_to_p";
        case TaskKind::Completion: return "completion";
        case TaskKind::Refinement: return "refinement";
    }
    return "?";
}

std::optional<TaskKind> task_kind_from_string(const std::string& s) {
    if (s == "u_cond") return TaskKind::UCond;
    if (s == "c_to_sp") return TaskKind::CtoSP;
    if (s == "cs_to_p") return TaskKind::CStoP;
    if (s == "completion") return TaskKind::Completion;
    if (s == "refinement") return TaskKind::Refinement;
    return std::nullopt;
}

PromptHeader header_for(const Layout& layout) {
    PromptHeader h;
    h.doc_type = layout.doc_type;
    h.canvas_w = layout.canvas_w;
    h.canvas_h = layout.canvas_h;
    h.bbox_count = static_cast<int>(layout.elements.size());
    std::set<CategoryId> cats;
    for (const Element& e : layout.elements) cats.insert(e.category);
    h.valid_categories.assign(cats.begin(), cats.end());
    return h;
}

namespace {

ConditionTuple complete_tuple(const Element& e) {
    QBBox q = e.qbox();
    ConditionTuple t;
    t.category = e.category;
    t.pos = {q.qx, q.qy};
    t.size = {q.qw, q.qh};
    return t;
}

TaskInstance base_instance(TaskKind kind, const Layout& layout) {
    TaskInstance inst;
    inst.kind = kind;
    inst.header = header_for(layout);
    inst.target = layout;
    return inst;
}

}  // namespace

ConditionList derive_condition(TaskKind kind, const Layout& target, std::size_t retained) {
    ConditionList cond;
    switch (kind) {
        case TaskKind::UCond:
            break;
        case TaskKind::CtoSP:
            for (const Element& e : target.elements) {
                ConditionTuple t;
                t.category = e.category;
                cond.push_back(t);
            }
            break;
        case TaskKind::CStoP:
            for (const Element& e : target.elements) {
                QBBox q = e.qbox();
                ConditionTuple t;
                t.category = e.category;
                t.size = {q.qw, q.qh};
                cond.push_back(t);
            }
            break;
        case TaskKind::Completion:
            for (std::size_t i = 0; i < retained && i < target.elements.size(); ++i)
                cond.push_back(complete_tuple(target.elements[i]));
            break;
        case TaskKind::Refinement:
            throw std::logic_error("derive_condition: refinement conditions are noise draws");
    }
    return cond;
}

TaskInstance make_ucond(const Layout& layout) {
    return base_instance(TaskKind::UCond, layout);
}

TaskInstance make_c_to_sp(const Layout& layout) {
    TaskInstance inst = base_instance(TaskKind::CtoSP, layout);
    inst.condition = derive_condition(TaskKind::CtoSP, layout);
    return inst;
}

TaskInstance make_cs_to_p(const Layout& layout) {
    TaskInstance inst = base_instance(TaskKind::CStoP, layout);
    inst.condition = derive_condition(TaskKind::CStoP, layout);
    return inst;
}

TaskInstance make_completion(const Layout& layout, std::mt19937_64& rng) {
    TaskInstance inst = base_instance(TaskKind::Completion, layout);
    double f = sample_retain_fraction(rng);
    auto k = static_cast<std::size_t>(std::llround(f * static_cast<double>(layout.elements.size())));
    inst.condition = derive_condition(TaskKind::Completion, layout, k);
    return inst;
}

double sample_retain_fraction(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 0.2);
    return unif(rng);
}

double sample_perturbation(std::mt19937_64& rng, double sigma) {
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> noise(0.0, sigma);
    return noise(rng);
}

TaskInstance make_refinement(const Layout& layout, std::mt19937_64& rng, double sigma) {
    TaskInstance inst = base_instance(TaskKind::Refinement, layout);
    for (const Element& e : layout.elements) {
        double x = e.bbox.x + sample_perturbation(rng, sigma);
        double y = e.bbox.y + sample_perturbation(rng, sigma);
        double w = e.bbox.w + sample_perturbation(rng, sigma);
        double h = e.bbox.h + sample_perturbation(rng, sigma);
        w = std::clamp(w, 0.001, 1.0);
        h = std::clamp(h, 0.001, 1.0);
        x = std::clamp(x, 0.0, 1.0 - w);
        y = std::clamp(y, 0.0, 1.0 - h);
        ConditionTuple t;
        t.category = e.category;
        t.pos = {quantize(x), quantize(y)};
        t.size = {quantize(w), quantize(h)};
        inst.condition.push_back(t);
    }
    return inst;
}

TaskKind sample_task_kind(const MixtureWeights& weights, std::mt19937_64& rng) {
    for (double w : weights.w)
        if (w < 0) throw std::domain_error("mixture weights must be non-negative");
    std::discrete_distribution<int> pick(weights.w.begin(), weights.w.end());
    return static_cast<TaskKind>(pick(rng));
}

std::vector<TaskInstance> make_mixture(const std::vector<Layout>& layouts,
                                       const MixtureWeights& weights, std::mt19937_64& rng,
                                       double sigma) {
    std::vector<TaskInstance> out;
    out.reserve(layouts.size());
    for (const Layout& layout : layouts) {
        switch (sample_task_kind(weights, rng)) {
            case TaskKind::UCond: out.push_back(make_ucond(layout)); break;
            case TaskKind::CtoSP: out.push_back(make_c_to_sp(layout)); break;
            case TaskKind::CStoP: out.push_back(make_cs_to_p(layout)); break;
            case TaskKind::Completion: out.push_back(make_completion(layout, rng)); break;
            case TaskKind::Refinement: out.push_back(make_refinement(layout, rng, sigma)); break;
        }
    }
    return out;
}

}  // namespace doclayout
