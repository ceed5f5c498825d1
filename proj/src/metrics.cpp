#include "doclayout/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

namespace doclayout {

double alignment_score(const Layout& layout) {
    const auto& els = layout.elements;
    const std::size_t n = els.size();
    if (n < 2) return 0.0;
    // anchor values per element: xl, xc, xr, yt, yc, yb
    std::vector<std::array<double, 6>> anchors(n);
    for (std::size_t i = 0; i < n; ++i) {
        const BBox& b = els[i].bbox;
        anchors[i] = {b.x, b.cx(), b.x2(), b.y, b.cy(), b.y2()};
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 6; ++a)
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) d = std::min(d, std::abs(anchors[i][a] - anchors[j][a]));
        d = std::min(d, 1.0 - 1e-9);
        total += -std::log(1.0 - d);
    }
    return 100.0 * total / static_cast<double>(n);
}

namespace {

double intersection_area(const BBox& a, const BBox& b) {
    double w = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    double h = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    return (w > 0 && h > 0) ? w * h : 0.0;
}

}  // namespace

double overlap_score(const Layout& layout) {
    const auto& els = layout.elements;
    const std::size_t n = els.size();
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double area_i = els[i].bbox.area();
        if (area_i <= 0) throw std::domain_error("overlap_score: zero-area element");
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) total += intersection_area(els[i].bbox, els[j].bbox) / area_i;
    }
    return n ? total / static_cast<double>(n) : 0.0;
}

double iou(const BBox& a, const BBox& b) {
    double inter = intersection_area(a, b);
    double uni = a.area() + b.area() - inter;
    return uni > 0 ? inter / uni : 0.0;
}

// Jonker-Volgenant style shortest augmenting path, O(n^3), square min-cost.
static Assignment solve_square_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<double> u(n + 1), v(n + 1);
    std::vector<int> p(n + 1), way(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                    if (minv[j] < delta) { delta = minv[j]; j1 = j; }
                }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    Assignment out;
    out.match.assign(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) out.match[p[j] - 1] = j - 1;
    for (int i = 0; i < n; ++i) out.value += cost[i][out.match[i]];
    return out;
}

Assignment hungarian(const std::vector<std::vector<double>>& costs, AssignSense sense) {
    const int rows = static_cast<int>(costs.size());
    const int cols = rows ? static_cast<int>(costs[0].size()) : 0;
    if (rows == 0 || cols == 0) return {};
    const int n = std::max(rows, cols);
    std::vector<std::vector<double>> square(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            double c = costs[i][j];
            if (std::isnan(c)) throw std::domain_error("hungarian: NaN entry");
            square[i][j] = sense == AssignSense::Max ? -c : c;
        }
    Assignment sol = solve_square_min(square);
    Assignment out;
    out.match.assign(rows, -1);
    for (int i = 0; i < rows; ++i) {
        int j = sol.match[i];
        if (j < cols) {
            out.match[i] = j;
            out.value += costs[i][j];
        }
    }
    return out;
}

double layout_miou(const Layout& gen, const Layout& ref) {
    const std::size_t n = gen.elements.size(), m = ref.elements.size();
    if (n == 0 || m == 0) return 0.0;
    std::vector<std::vector<double>> weights(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            if (gen.elements[i].category == ref.elements[j].category)
                weights[i][j] = iou(gen.elements[i].bbox, ref.elements[j].bbox);
    Assignment a = hungarian(weights, AssignSense::Max);
    return a.value / static_cast<double>(std::max(n, m));
}

double set_miou(const std::vector<Layout>& gen_set, const std::vector<Layout>& ref_set) {
    const std::size_t n = gen_set.size(), m = ref_set.size();
    if (n == 0 || m == 0) throw std::domain_error("set_miou: empty set");
    std::vector<std::vector<double>> scores(n, std::vector<double>(m));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) scores[i][j] = layout_miou(gen_set[i], ref_set[j]);
    Assignment a = hungarian(scores, AssignSense::Max);
    return a.value / static_cast<double>(std::max(n, m));
}

std::vector<double> extract_features(const Layout& layout, const Taxonomy& taxonomy) {
    const auto& els = layout.elements;
    const double n = static_cast<double>(els.size());
    auto moments = [&](auto&& get) {
        double mean = 0, m2 = 0;
        for (const Element& e : els) mean += get(e);
        mean /= n;
        for (const Element& e : els) {
            double d = get(e) - mean;
            m2 += d * d;
        }
        return std::pair<double, double>{mean, std::sqrt(m2 / n)};
    };
    auto [mx, sx] = moments([](const Element& e) { return e.bbox.x; });
    auto [my, sy] = moments([](const Element& e) { return e.bbox.y; });
    auto [mw, sw] = moments([](const Element& e) { return e.bbox.w; });
    auto [mh, sh] = moments([](const Element& e) { return e.bbox.h; });
    auto [ma, sa] = moments([](const Element& e) { return e.bbox.area(); });

    // fraction of 32x32 cells whose center lies inside some element
    int covered = 0;
    for (int gy = 0; gy < kCoverageGrid; ++gy)
        for (int gx = 0; gx < kCoverageGrid; ++gx) {
            double cx = (gx + 0.5) / kCoverageGrid;
            double cy = (gy + 0.5) / kCoverageGrid;
            for (const Element& e : els) {
                const BBox& b = e.bbox;
                if (cx >= b.x && cx <= b.x2() && cy >= b.y && cy <= b.y2()) {
                    ++covered;
                    break;
                }
            }
        }
    double coverage = static_cast<double>(covered) / (kCoverageGrid * kCoverageGrid);

    std::vector<double> f;
    f.reserve(kFeatureBaseDim + taxonomy.size());
    f.insert(f.end(), {std::log1p(n), mx, sx, my, sy, mw, sw, mh, sh, ma, sa, coverage,
                       overlap_score(layout), alignment_score(layout) / 100.0});
    std::vector<double> hist(taxonomy.size(), 0.0);
    for (const Element& e : els) {
        if (e.category.id >= taxonomy.size())
            throw std::out_of_range("extract_features: category outside taxonomy");
        hist[e.category.id] += 1.0 / n;
    }
    f.insert(f.end(), hist.begin(), hist.end());
    return f;
}

double frechet_distance(const std::vector<std::vector<double>>& feats_a,
                        const std::vector<std::vector<double>>& feats_b) {
    if (feats_a.size() < 2 || feats_b.size() < 2)
        throw std::domain_error("frechet_distance: need at least 2 samples per set");
    const auto d = feats_a[0].size();
    for (const auto& f : feats_a)
        if (f.size() != d) throw std::domain_error("frechet_distance: dimension mismatch");
    for (const auto& f : feats_b)
        if (f.size() != d) throw std::domain_error("frechet_distance: dimension mismatch");

    auto fit = [d](const std::vector<std::vector<double>>& feats) {
        const auto n = feats.size();
        Eigen::MatrixXd X(n, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) X(i, j) = feats[i][j];
        Eigen::VectorXd mu = X.colwise().mean();
        Eigen::MatrixXd centered = X.rowwise() - mu.transpose();
        Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(n - 1);
        return std::pair<Eigen::VectorXd, Eigen::MatrixXd>{mu, sigma};
    };
    auto [mu_a, sig_a] = fit(feats_a);
    auto [mu_b, sig_b] = fit(feats_b);

    // principal square root via eigendecomposition, negative spectrum clamped
    auto sqrt_psd = [](const Eigen::MatrixXd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Eigen::MatrixXd(es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose());
    };
    Eigen::MatrixXd root_a = sqrt_psd(sig_a);
    Eigen::MatrixXd inner = root_a * sig_b * root_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner);
    double trace_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    double dist2 = (mu_a - mu_b).squaredNorm() + sig_a.trace() + sig_b.trace() - 2.0 * trace_sqrt;
    return std::max(dist2, 0.0);
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["fid"] = fid_available ? nlohmann::ordered_json(fid) : nlohmann::ordered_json(nullptr);
    j["alignment"] = alignment;
    j["overlap"] = overlap;
    j["miou"] = miou;
    j["gen_count"] = gen_count;
    j["ref_count"] = ref_count;
    j["per_layout"] = {{"alignment", per_layout_alignment}, {"overlap", per_layout_overlap}};
    return j.dump(2);
}

std::string MetricReport::csv_header() { return "fid,alignment,overlap,miou,gen_count,ref_count"; }

std::string MetricReport::to_csv_row() const {
    std::ostringstream os;
    if (fid_available) os << fid;
    os << ',' << alignment << ',' << overlap << ',' << miou << ',' << gen_count << ',' << ref_count;
    return os.str();
}

MetricReport evaluate(const std::vector<Layout>& gen_set, const std::vector<Layout>& ref_set,
                      const Taxonomy& taxonomy) {
    if (gen_set.empty() || ref_set.empty()) throw std::domain_error("evaluate: empty set");
    MetricReport r;
    r.gen_count = gen_set.size();
    r.ref_count = ref_set.size();
    double ali = 0, ove = 0;
    for (const Layout& l : gen_set) {
        double a = alignment_score(l), o = overlap_score(l);
        r.per_layout_alignment.push_back(a);
        r.per_layout_overlap.push_back(o);
        ali += a;
        ove += o;
    }
    r.alignment = ali / static_cast<double>(gen_set.size());
    r.overlap = ove / static_cast<double>(gen_set.size());
    r.miou = set_miou(gen_set, ref_set);
    if (gen_set.size() >= 2 && ref_set.size() >= 2) {
        std::vector<std::vector<double>> fa, fb;
        for (const Layout& l : gen_set) fa.push_back(extract_features(l, taxonomy));
        for (const Layout& l : ref_set) fb.push_back(extract_features(l, taxonomy));
        r.fid = frechet_distance(fa, fb);
    } else {
        r.fid_available = false;
    }
    return r;
}

MetricReport self_report(const std::vector<Layout>& ref_set, const Taxonomy& taxonomy) {
    MetricReport r = evaluate(ref_set, ref_set, taxonomy);
    return r;
}

}  // namespace doclayout
