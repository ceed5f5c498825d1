#pragma once

#include <array>
#include <functional>
#include <random>

#include "doclayout/serialization.hpp"

namespace doclayout {

enum class TaskKind { UCond, CtoSP, CStoP, Completion, Refinement };

inline constexpr int kTaskKindCount = 5;

const char* to_string(TaskKind k);
std::optional<TaskKind> task_kind_from_string(const std::string& s);

struct TaskInstance {
    TaskKind kind = TaskKind::UCond;
    PromptHeader header;
    ConditionList condition;
    Layout target;
    std::uint64_t seed = 0;
};

// Header derived from the target: full metadata, distinct categories in id order.
PromptHeader header_for(const Layout& layout);

TaskInstance make_ucond(const Layout& layout);
TaskInstance make_c_to_sp(const Layout& layout);
TaskInstance make_cs_to_p(const Layout& layout);

// Retains a reading-order prefix of round(f*N) elements, f ~ U[0, 0.2].
TaskInstance make_completion(const Layout& layout, std::mt19937_64& rng);

// Each coordinate perturbed by N(0, sigma^2) in normalized space, clamped to
// keep the box on the page, then re-quantized into complete tuples.
TaskInstance make_refinement(const Layout& layout, std::mt19937_64& rng, double sigma = 0.1);

// One N(0, sigma^2) draw; the refinement perturbation primitive, exposed so its
// calibration can be checked directly.
double sample_perturbation(std::mt19937_64& rng, double sigma);

// One U[0, 0.2] draw; the completion retain-fraction primitive, exposed so its
// distribution can be checked directly.
double sample_retain_fraction(std::mt19937_64& rng);

struct MixtureWeights {
    std::array<double, kTaskKindCount> w{1, 1, 1, 3, 3};  // ucond : c->s+p : c+s->p : completion : refinement
};

TaskKind sample_task_kind(const MixtureWeights& weights, std::mt19937_64& rng);

// Draws a kind per layout i.i.d. by weight and builds the instance.
std::vector<TaskInstance> make_mixture(const std::vector<Layout>& layouts,
                                       const MixtureWeights& weights, std::mt19937_64& rng,
                                       double sigma = 0.1);

// The masking rule of `kind` applied to `target`; used to re-derive and check
// stored conditions (random kinds reuse the instance's recorded draws, so only
// deterministic kinds are re-derivable).
ConditionList derive_condition(TaskKind kind, const Layout& target, std::size_t retained = 0);

// One JSON object per line; target boxes kept as normalized doubles, condition
// fields kept quantized.
std::string task_to_json_line(const TaskInstance& inst, const Taxonomy& taxonomy);
TaskInstance task_from_json_line(const std::string& line, const Taxonomy& taxonomy);

}  // namespace doclayout
