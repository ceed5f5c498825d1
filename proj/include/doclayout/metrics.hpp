#pragma once

#include <string>
#include <vector>

#include "doclayout/core.hpp"
#include "doclayout/taxonomy.hpp"

namespace doclayout {

// Mean -log(1 - d) over nearest anchor-line distances, x100.
// d(i) = min over the six anchors (left/center/right, top/center/bottom) of the
// closest same-anchor value among the other elements. Single element -> 0.
double alignment_score(const Layout& layout);

// Mean per-element fraction of its own area covered by each other element.
double overlap_score(const Layout& layout);

double iou(const BBox& a, const BBox& b);

enum class AssignSense { Max, Min };

struct Assignment {
    std::vector<int> match;  // match[row] = column, -1 for padded rows
    double value = 0;
};

// Optimal assignment on a rectangular matrix, square-padded with zeros.
Assignment hungarian(const std::vector<std::vector<double>>& costs, AssignSense sense);

// Category-gated optimal matching; sum of matched IoU / max(|gen|, |ref|).
double layout_miou(const Layout& gen, const Layout& ref);

// Hungarian over the layout-pair layout_miou matrix, same denominator rule.
double set_miou(const std::vector<Layout>& gen_set, const std::vector<Layout>& ref_set);

// Hand-crafted per-page embedding:
// [log1p(N), mean/std of x y w h, mean/std of area, 32x32 grid coverage,
//  overlap, unscaled alignment] ++ normalized category histogram.
std::vector<double> extract_features(const Layout& layout, const Taxonomy& taxonomy);

inline constexpr int kFeatureBaseDim = 14;
inline constexpr int kCoverageGrid = 32;

// Squared Frechet distance between Gaussian fits of the two feature sets.
double frechet_distance(const std::vector<std::vector<double>>& feats_a,
                        const std::vector<std::vector<double>>& feats_b);

struct MetricReport {
    double fid = 0;
    double alignment = 0;
    double overlap = 0;
    double miou = 0;
    bool fid_available = true;
    std::size_t gen_count = 0, ref_count = 0;
    std::vector<double> per_layout_alignment;
    std::vector<double> per_layout_overlap;

    std::string to_json() const;
    std::string to_csv_row() const;
    static std::string csv_header();
};

// Full metric suite for a generated-vs-reference set pair. With fewer than two
// layouts per side the Frechet fit is impossible; fid_available goes false.
MetricReport evaluate(const std::vector<Layout>& gen_set, const std::vector<Layout>& ref_set,
                      const Taxonomy& taxonomy);

// Ground-truth self report: alignment/overlap of the reference set itself.
MetricReport self_report(const std::vector<Layout>& ref_set, const Taxonomy& taxonomy);

}  // namespace doclayout
