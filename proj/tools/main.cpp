// doclayout: layout corpus ingestion, task construction, baseline generation,
// evaluation and rendering, wired as one reproducible pipeline binary.
//
// Exit codes: 0 success, 1 data/validation failure, 2 usage error.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "doclayout/dataset.hpp"
#include "doclayout/generator.hpp"
#include "doclayout/metrics.hpp"
#include "doclayout/render.hpp"
#include "doclayout/serialization.hpp"
#include "doclayout/tasks.hpp"

namespace fs = std::filesystem;
using namespace doclayout;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Manifest {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::uint64_t seed = 0;
    bool has_seed = false;
};

void write_manifest(const Manifest& m) {
    if (m.outputs.empty()) return;
    nlohmann::ordered_json j;
    j["tool"] = "doclayout";
    j["version"] = kVersion;
    j["command"] = m.command;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["config"] = m.config;
    if (m.has_seed) j["seed"] = m.seed;
    std::ofstream out(m.outputs.front() + ".manifest.json");
    out << j.dump(2) << '\n';
}

Taxonomy load_taxonomy(const std::string& path) {
    if (path.empty()) return Taxonomy::default_coarse();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--taxonomy", "cannot open " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    std::vector<std::string> labels =
        j.is_array() ? j.get<std::vector<std::string>>()
                     : j.at("labels").get<std::vector<std::string>>();
    return Taxonomy(fs::path(path).stem().string(), labels, Granularity::Coarse);
}

std::vector<Layout> load_corpus(const std::string& path, const Taxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus: " + path);
    std::vector<Layout> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(record_to_layout(record_from_json_line(line), taxonomy));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::uint64_t resolve_seed(const CLI::Option* opt, std::uint64_t seed) {
    if (opt->count()) return seed;
    return std::random_device{}();
}

// Falls back to $DOCLAYOUT_DATA_DIR/<path> when the path does not exist as given.
std::string resolve_input(const std::string& path) {
    if (path.empty() || fs::exists(path)) return path;
    if (const char* dir = std::getenv("DOCLAYOUT_DATA_DIR")) {
        fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;
}

void require_readable(const std::string& path) {
    if (!fs::exists(path)) throw CLI::ValidationError("--input", "no such file: " + path);
}

// Deterministic ordered parallel map: results land by index regardless of
// worker interleaving.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    int k = std::min<int>(jobs, static_cast<int>(n));
    workers.reserve(k);
    for (int t = 0; t < k; ++t)
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& w : workers) w.join();
}

// ---- subcommands ----

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& output,
               const std::string& taxonomy_path, int max_elements, bool no_dedup) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    for (const auto& p : inputs) require_readable(p);
    IngestOptions opts;
    opts.max_elements = max_elements;
    opts.dedup = !no_dedup;
    Ingestor ingestor(taxonomy, opts);

    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write " + output);
    std::ofstream rejects(output + ".rejects.jsonl");
    for (const auto& path : inputs) {
        std::ifstream in(path);
        ingestor.run(
            in,
            [&](const Layout& layout, const LayoutRecord&) {
                out << record_to_json_line(layout_to_record(layout, taxonomy)) << '\n';
            },
            [&](const Rejection& r) {
                rejects << nlohmann::ordered_json{
                               {"file", path}, {"line", r.line_no}, {"id", r.id}, {"reason", r.reason}}
                               .dump()
                        << '\n';
            });
    }
    const IngestStats& stats = ingestor.stats();
    nlohmann::ordered_json summary;
    summary["accepted"] = stats.accepted;
    summary["rejected"] = stats.rejected_by_reason;
    Manifest m{"ingest", inputs, {output, output + ".rejects.jsonl"}};
    m.config = {{"max_elements", max_elements}, {"dedup", !no_dedup}, {"summary", summary}};
    write_manifest(m);
    std::cerr << "ingest: accepted " << stats.accepted << ", rejected " << stats.rejected() << "\n";
    if (stats.accepted == 0) {
        std::cerr << "warning: all records rejected, output is empty\n";
        return 1;
    }
    return 0;
}

int cmd_stats(const std::string& input, const std::string& output, const std::string& features_csv,
              const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    std::ifstream in(input);
    CorpusStats stats;
    std::vector<Layout> for_features;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Layout l = record_to_layout(record_from_json_line(line), taxonomy);
        stats.add(l, taxonomy);
        if (!features_csv.empty()) for_features.push_back(std::move(l));
    }
    if (stats.pages == 0) {
        std::cerr << "stats: empty corpus\n";
        return 1;
    }
    std::ofstream out(output);
    out << stats.to_json() << '\n';
    Manifest m{"stats", {input}, {output}};
    if (!features_csv.empty()) {
        std::ofstream fout(features_csv);
        export_features(for_features, taxonomy, fout);
        m.outputs.push_back(features_csv);
    }
    write_manifest(m);
    return 0;
}

int cmd_build_tasks(const std::string& input, const std::string& output, const std::string& task,
                    const std::string& weights_csv, std::uint64_t seed, double sigma,
                    const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    std::vector<Layout> layouts = load_corpus(input, taxonomy);
    if (layouts.empty()) {
        std::cerr << "build-tasks: empty corpus\n";
        return 1;
    }
    std::mt19937_64 rng(seed);
    std::vector<TaskInstance> instances;
    if (task == "mixture") {
        MixtureWeights weights;
        if (!weights_csv.empty()) {
            std::istringstream ws(weights_csv);
            std::string tok;
            int i = 0;
            while (std::getline(ws, tok, ',') && i < kTaskKindCount) weights.w[i++] = std::stod(tok);
            if (i != kTaskKindCount)
                throw CLI::ValidationError("--weights", "expected 5 comma-separated weights");
        }
        instances = make_mixture(layouts, weights, rng, sigma);
    } else {
        auto kind = task_kind_from_string(task);
        if (!kind) throw CLI::ValidationError("--task", "unknown task '" + task + "'");
        for (const Layout& l : layouts) {
            switch (*kind) {
                case TaskKind::UCond: instances.push_back(make_ucond(l)); break;
                case TaskKind::CtoSP: instances.push_back(make_c_to_sp(l)); break;
                case TaskKind::CStoP: instances.push_back(make_cs_to_p(l)); break;
                case TaskKind::Completion: instances.push_back(make_completion(l, rng)); break;
                case TaskKind::Refinement: instances.push_back(make_refinement(l, rng, sigma)); break;
            }
        }
    }
    std::ofstream out(output);
    for (std::size_t i = 0; i < instances.size(); ++i) {
        instances[i].seed = seed;
        out << task_to_json_line(instances[i], taxonomy) << '\n';
    }
    Manifest m{"build-tasks", {input}, {output}};
    m.config = {{"task", task}, {"sigma", sigma}, {"weights", weights_csv}};
    m.seed = seed;
    m.has_seed = true;
    write_manifest(m);
    return 0;
}

int cmd_train(const std::string& input, const std::string& output, int order, double alpha,
              const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    Vocabulary vocab(taxonomy);
    std::vector<Layout> layouts = load_corpus(input, taxonomy);
    if (layouts.empty()) {
        std::cerr << "train: empty corpus\n";
        return 1;
    }
    std::vector<TokenSequence> corpus;
    corpus.reserve(layouts.size());
    for (const Layout& l : layouts) corpus.push_back(encode_layout(l, vocab));
    TrainedGenerator gen = train(corpus, vocab, order, alpha);
    save_generator(gen, output);
    std::cerr << "train: " << layouts.size() << " pages, perplexity "
              << perplexity(gen.model, vocab, corpus) << "\n";
    Manifest m{"train", {input}, {output}};
    m.config = {{"order", order}, {"alpha", alpha}, {"vocab_hash", vocab.hash()}};
    write_manifest(m);
    return 0;
}

int cmd_generate(const std::string& input, const std::string& model_path, const std::string& output,
                 std::uint64_t seed, bool greedy, double temperature, int top_k, int delta,
                 int jobs, const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    Vocabulary vocab(taxonomy);
    TrainedGenerator gen = load_generator(model_path, vocab);

    std::vector<TaskInstance> instances;
    {
        std::ifstream in(input);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) instances.push_back(task_from_json_line(line, taxonomy));
    }
    if (instances.empty()) {
        std::cerr << "generate: no task instances\n";
        return 1;
    }
    SamplingParams sampling;
    sampling.greedy = greedy;
    sampling.temperature = temperature;
    sampling.top_k = top_k;

    std::vector<std::string> lines(instances.size());
    parallel_for(instances.size(), jobs, [&](std::size_t i) {
        const TaskInstance& inst = instances[i];
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * (i + 1));
        Layout out;
        if (inst.kind == TaskKind::Refinement) {
            Layout noisy = inst.target;  // geometry replaced by the perturbed condition
            for (std::size_t e = 0; e < noisy.elements.size() && e < inst.condition.size(); ++e) {
                const ConditionTuple& t = inst.condition[e];
                noisy.elements[e].bbox = BBox{dequantize(t.pos->first), dequantize(t.pos->second),
                                              dequantize(t.size->first), dequantize(t.size->second)};
            }
            out = refine(gen.histogram, noisy, delta);
        } else {
            out = generate(gen.model, vocab, inst.header, inst.condition, inst.kind, sampling, rng);
            out.id = inst.target.id;
        }
        out.id = inst.target.id;
        lines[i] = record_to_json_line(layout_to_record(out, taxonomy));
    });
    std::ofstream out(output);
    for (const std::string& l : lines) out << l << '\n';
    Manifest m{"generate", {input, model_path}, {output}};
    m.config = {{"greedy", greedy}, {"temperature", temperature}, {"top_k", top_k},
                {"delta", delta}, {"jobs", jobs}};
    m.seed = seed;
    m.has_seed = true;
    write_manifest(m);
    return 0;
}

int cmd_refine(const std::string& input, const std::string& model_path, const std::string& output,
               int delta, const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    Vocabulary vocab(taxonomy);
    TrainedGenerator gen = load_generator(model_path, vocab);
    std::vector<Layout> layouts = load_corpus(input, taxonomy);
    std::ofstream out(output);
    for (const Layout& l : layouts)
        out << record_to_json_line(layout_to_record(refine(gen.histogram, l, delta), taxonomy))
            << '\n';
    Manifest m{"refine", {input, model_path}, {output}};
    m.config = {{"delta", delta}};
    write_manifest(m);
    return 0;
}

// Keeps only the requested metric families in the report JSON (counts stay).
std::string filter_report(const std::string& report_json, const std::string& selection) {
    if (selection.empty()) return report_json;
    std::set<std::string> keep = {"gen_count", "ref_count"};
    std::istringstream sel(selection);
    std::string name;
    while (std::getline(sel, name, ',')) {
        if (name == "fid") {
            keep.insert("fid");
            keep.insert("fid_available");
        } else if (name == "alignment" || name == "overlap") {
            keep.insert(name);
            keep.insert("per_layout_" + name);
        } else if (name == "miou") {
            keep.insert("miou");
        } else {
            throw CLI::ValidationError("--metrics", "unknown metric '" + name + "'");
        }
    }
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(report_json);
    for (auto it = j.begin(); it != j.end();)
        it = keep.count(it.key()) ? std::next(it) : j.erase(it);
    return j.dump();
}

int cmd_evaluate(const std::string& input, const std::string& reference, const std::string& output,
                 bool self, bool csv, const std::string& metrics_sel,
                 const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    MetricReport report;
    Manifest m{"evaluate", {}, {output}};
    if (self) {
        require_readable(reference);
        std::vector<Layout> ref = load_corpus(reference, taxonomy);
        if (ref.empty()) {
            std::cerr << "evaluate: empty reference corpus\n";
            return 1;
        }
        report = self_report(ref, taxonomy);
        m.inputs = {reference};
    } else {
        require_readable(input);
        require_readable(reference);
        std::vector<Layout> gen = load_corpus(input, taxonomy);
        std::vector<Layout> ref = load_corpus(reference, taxonomy);
        if (gen.empty() || ref.empty()) {
            std::cerr << "evaluate: empty corpus\n";
            return 1;
        }
        report = evaluate(gen, ref, taxonomy);
        m.inputs = {input, reference};
    }
    std::string body = filter_report(report.to_json(), metrics_sel);
    std::ofstream out(output);
    if (csv)
        out << MetricReport::csv_header() << '\n' << report.to_csv_row() << '\n';
    else
        out << body << '\n';
    m.config = {{"self", self}, {"csv", csv}, {"metrics", metrics_sel}};
    write_manifest(m);
    std::cout << body << '\n';
    if (!report.fid_available) {
        std::cerr << "evaluate: frechet distance needs at least 2 layouts per side\n";
        return 1;
    }
    return 0;
}

int cmd_render(const std::string& input, const std::string& output, bool sheet, int px_w, int px_h,
               bool no_labels, const std::string& taxonomy_path) {
    Taxonomy taxonomy = load_taxonomy(taxonomy_path);
    require_readable(input);
    std::vector<Layout> layouts = load_corpus(input, taxonomy);
    if (layouts.empty()) {
        std::cerr << "render: empty corpus\n";
        return 1;
    }
    RenderStyle style;
    style.canvas_px_w = px_w;
    style.canvas_px_h = px_h;
    style.labels = !no_labels;
    Manifest m{"render", {input}, {}};
    if (sheet) {
        std::ofstream out(output);
        out << render_sheet(layouts, taxonomy, style);
        m.outputs = {output};
    } else {
        fs::create_directories(output);
        for (std::size_t i = 0; i < layouts.size(); ++i) {
            std::string name = layouts[i].id.empty() ? "page_" + std::to_string(i) : layouts[i].id;
            std::ofstream out(fs::path(output) / (name + ".svg"));
            out << render_svg(layouts[i], taxonomy, style);
        }
        m.outputs = {(fs::path(output) / "render").string()};
    }
    m.config = {{"sheet", sheet}, {"canvas_px_w", px_w}, {"canvas_px_h", px_h}};
    write_manifest(m);
    return 0;
}

int cmd_coarsen(const std::string& input, const std::string& map_path, const std::string& output) {
    require_readable(input);
    LabelMap map = LabelMap::load(map_path);
    std::vector<Layout> layouts = load_corpus(input, map.fine());
    std::ofstream out(output);
    for (const Layout& l : layouts)
        out << record_to_json_line(layout_to_record(map.project_layout(l), map.coarse())) << '\n';
    Manifest m{"coarsen", {input, map_path}, {output}};
    write_manifest(m);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"document layout generation and evaluation pipeline"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string input, output, reference, taxonomy_path, model_path, map_path;
    std::vector<std::string> inputs;
    std::string task = "mixture", weights;
    std::uint64_t seed = 0;
    int order = 4, top_k = 0, delta = 30, max_elements = kDefaultMaxElements;
    int px_w = 600, px_h = 800;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    double alpha = 0.1, sigma = 0.1, temperature = 1.0;
    bool no_dedup = false, greedy = false, self = false, csv = false, sheet = false,
         no_labels = false;
    if (const char* env = std::getenv("DOCLAYOUT_TAXONOMY")) taxonomy_path = env;

    auto* ingest = app.add_subcommand("ingest", "validate, dedup and normalize a JSONL corpus");
    ingest->add_option("--input", inputs, "input JSONL file(s)")->required();
    ingest->add_option("--output", output, "clean corpus path")->required();
    ingest->add_option("--taxonomy", taxonomy_path);
    ingest->add_option("--max-elements", max_elements);
    ingest->add_flag("--no-dedup", no_dedup);

    auto* stats = app.add_subcommand("stats", "corpus statistics and feature export");
    stats->add_option("--input", input)->required();
    stats->add_option("--output", output)->required();
    std::string features_csv;
    stats->add_option("--features", features_csv, "also write a per-page feature CSV");
    stats->add_option("--taxonomy", taxonomy_path);

    auto* build = app.add_subcommand("build-tasks", "construct task instances from layouts");
    build->add_option("--input", input)->required();
    build->add_option("--output", output)->required();
    build->add_option("--task", task, "u_cond|c_to_sp|cs_to_p|completion|refinement|mixture");
    build->add_option("--weights", weights, "mixture weights, e.g. 1,1,1,3,3");
    auto* build_seed = build->add_option("--seed", seed);
    build->add_option("--sigma", sigma, "refinement noise std");
    build->add_option("--taxonomy", taxonomy_path);

    auto* train_cmd = app.add_subcommand("train", "fit the counting model on a corpus");
    train_cmd->add_option("--input", input)->required();
    train_cmd->add_option("--output", output)->required();
    train_cmd->add_option("--order", order);
    train_cmd->add_option("--alpha", alpha);
    train_cmd->add_option("--taxonomy", taxonomy_path);

    auto* gen_cmd = app.add_subcommand("generate", "decode layouts for task instances");
    gen_cmd->add_option("--input", input, "task JSONL")->required();
    gen_cmd->add_option("--model", model_path)->required();
    gen_cmd->add_option("--output", output)->required();
    auto* gen_seed = gen_cmd->add_option("--seed", seed);
    gen_cmd->add_flag("--greedy", greedy);
    gen_cmd->add_option("--temperature", temperature);
    gen_cmd->add_option("--top-k", top_k);
    gen_cmd->add_option("--delta", delta, "refinement snap radius");
    gen_cmd->add_option("--jobs", jobs);
    gen_cmd->add_option("--taxonomy", taxonomy_path);

    auto* refine_cmd = app.add_subcommand("refine", "histogram-snap a noisy corpus");
    refine_cmd->add_option("--input", input)->required();
    refine_cmd->add_option("--model", model_path)->required();
    refine_cmd->add_option("--output", output)->required();
    refine_cmd->add_option("--delta", delta);
    refine_cmd->add_option("--taxonomy", taxonomy_path);

    auto* eval_cmd = app.add_subcommand("evaluate", "metric report for generated vs reference");
    eval_cmd->add_option("--input", input, "generated JSONL");
    eval_cmd->add_option("--reference", reference, "reference JSONL")->required();
    eval_cmd->add_option("--output", output)->required();
    eval_cmd->add_flag("--self", self, "ground-truth self report (reference only)");
    eval_cmd->add_flag("--csv", csv);
    std::string metrics_sel;
    eval_cmd->add_option("--metrics", metrics_sel, "comma list of fid,alignment,overlap,miou");
    eval_cmd->add_option("--taxonomy", taxonomy_path);

    auto* render_cmd = app.add_subcommand("render", "SVG previews");
    render_cmd->add_option("--input", input)->required();
    render_cmd->add_option("--output", output)->required();
    render_cmd->add_flag("--sheet", sheet, "single stacked document");
    render_cmd->add_option("--canvas-w", px_w);
    render_cmd->add_option("--canvas-h", px_h);
    render_cmd->add_flag("--no-labels", no_labels);
    render_cmd->add_option("--taxonomy", taxonomy_path);

    auto* coarsen_cmd = app.add_subcommand("coarsen", "project fine labels to coarse");
    coarsen_cmd->add_option("--input", input)->required();
    coarsen_cmd->add_option("--label-map", map_path)->required();
    coarsen_cmd->add_option("--output", output)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    input = resolve_input(input);
    reference = resolve_input(reference);
    model_path = resolve_input(model_path);
    map_path = resolve_input(map_path);
    for (std::string& p : inputs) p = resolve_input(p);

    try {
        if (*ingest) return cmd_ingest(inputs, output, taxonomy_path, max_elements, no_dedup);
        if (*stats) return cmd_stats(input, output, features_csv, taxonomy_path);
        if (*build)
            return cmd_build_tasks(input, output, task, weights, resolve_seed(build_seed, seed),
                                   sigma, taxonomy_path);
        if (*train_cmd) return cmd_train(input, output, order, alpha, taxonomy_path);
        if (*gen_cmd)
            return cmd_generate(input, model_path, output, resolve_seed(gen_seed, seed), greedy,
                                temperature, top_k, delta, jobs, taxonomy_path);
        if (*refine_cmd) return cmd_refine(input, model_path, output, delta, taxonomy_path);
        if (*eval_cmd) {
            if (!self && input.empty())
                throw CLI::ValidationError("--input", "required unless --self");
            return cmd_evaluate(input, reference, output, self, csv, metrics_sel, taxonomy_path);
        }
        if (*render_cmd) return cmd_render(input, output, sheet, px_w, px_h, no_labels, taxonomy_path);
        if (*coarsen_cmd) return cmd_coarsen(input, map_path, output);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
