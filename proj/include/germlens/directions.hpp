#pragma once

#include "germlens/germ.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/parallel.hpp"

#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace germlens {

/// Estimates below this confidence make verdicts abstain.
constexpr double kConfidenceGate = 0.8;

struct DirectionParams {
    Schedule schedule;
    int per_shell = 600;
    double eta = 0.05;
    std::uint64_t seed = 0;
};

/// Unit-sphere cloud approximating D(A).
/// Points carry their source shell; `level` marks the two refinement levels that enter estimates
/// (0 = coarse, 1 = fine, -1 = diagnostic only).
struct DirectionSample {
    int n = 0;
    double eta = 0.05;
    Cloud points;
    std::vector<double> source_radii;
    std::vector<int> level;
    std::vector<int> cluster;  // -1 for diagnostic points
    int clusters = 0;
    int dim = -1;
    double confidence = 0.0;
    bool unstable = false;
    bool low_confidence = false;
    double drift = 0.0;
    std::vector<std::string> warnings;

    Cloud estimate_points() const
    {
        Cloud out;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (level[i] >= 0) out.push_back(points[i]);
        return out;
    }
    Cloud level_points(int lv) const
    {
        Cloud out;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (level[i] == lv) out.push_back(points[i]);
        return out;
    }
    bool empty() const { return estimate_points().empty(); }
};

struct DimensionResult {
    int dim = -1;
    double confidence = 0.0;
    bool low_confidence = false;
    int dim_coarse = -1;  // vote at scale eta
    int dim_fine = -1;    // vote at scale eta/2
    std::string method;
};

namespace detail {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
    std::size_t find(std::size_t i)
    {
        while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

/// Single-linkage labels at scale eta, numbered by first appearance.
inline std::vector<int> single_linkage(const Cloud& pts, double eta)
{
    std::vector<int> labels(pts.size(), -1);
    if (pts.empty()) return labels;
    UnionFind uf(pts.size());
    const HashGrid grid(pts, eta);
    for (std::size_t i = 0; i < pts.size(); ++i)
        grid.for_each_within(pts[i], eta, [&](std::size_t j) {
            if (j > i) uf.unite(i, j);
        });
    std::map<std::size_t, int> ids;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto root = uf.find(i);
        auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()));
        labels[i] = it->second;
    }
    return labels;
}

inline double diameter(const Cloud& pts)
{
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
    return d;
}

/// Local PCA rank at point i using neighbours within `radius`, widened to the 8 nearest when sparse.
inline int local_rank(const Cloud& pts, std::size_t i, double radius, const HashGrid& grid)
{
    const int n = static_cast<int>(pts[i].size());
    std::vector<std::size_t> nb;
    grid.for_each_within(pts[i], radius, [&](std::size_t j) { nb.push_back(j); });
    constexpr std::size_t kMinNeighbours = 8;
    if (nb.size() < kMinNeighbours + 1) {
        std::vector<std::pair<double, std::size_t>> all;
        all.reserve(pts.size());
        for (std::size_t j = 0; j < pts.size(); ++j) all.emplace_back((pts[j] - pts[i]).squaredNorm(), j);
        const std::size_t k = std::min(all.size(), kMinNeighbours + 1);
        std::partial_sort(all.begin(), all.begin() + static_cast<long>(k), all.end());
        nb.clear();
        for (std::size_t t = 0; t < k; ++t) nb.push_back(all[t].second);
    }
    if (nb.size() < 3) return 0;
    Point mean = Point::Zero(n);
    for (auto j : nb) mean += pts[j];
    mean /= static_cast<double>(nb.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    for (auto j : nb) {
        const Point d = pts[j] - mean;
        cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto& ev = es.eigenvalues();
    const double top = ev[n - 1];
    if (!(top > 0.0)) return 0;
    int rank = 0;
    for (int k = 0; k < n; ++k)
        if (ev[k] > 0.1 * top) ++rank;
    // rank counts directions within the sphere; the sphere has dimension n - 1
    return std::min(rank, n - 1);
}

/// Largest nearest-neighbour distance inside a cloud.
inline double sampling_gap(const Cloud& pts)
{
    if (pts.size() < 2) return 0.0;
    double gap = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double nn = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j)
            if (j != i) nn = std::min(nn, (pts[i] - pts[j]).norm());
        gap = std::max(gap, nn);
    }
    return gap;
}

struct Vote {
    int dim = 0;
    double agreement = 0.0;
};

inline Vote rank_vote(const Cloud& pts, double radius)
{
    const HashGrid grid(pts, radius);
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 400);
    std::map<int, int> votes;
    int total = 0;
    for (std::size_t i = 0; i < pts.size(); i += stride) {
        ++votes[local_rank(pts, i, radius, grid)];
        ++total;
    }
    Vote v;
    int best = -1;
    for (auto [d, c] : votes)
        if (c > best) {
            best = c;
            v.dim = d;
        }
    v.agreement = total ? static_cast<double>(best) / total : 0.0;
    return v;
}

/// Log-log slope of a cluster's per-shell diameter against the shell radius over the finest shells.
/// Shell points join the cluster whose mean direction is nearest. NaN with fewer than 3 usable shells.
inline double shrink_exponent(const DirectionSample& D, const std::vector<Point>& means, int c, int shells = 6)
{
    std::vector<double> radii(D.source_radii.begin(), D.source_radii.end());
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    if (static_cast<int>(radii.size()) > shells) radii.resize(static_cast<std::size_t>(shells));
    std::vector<double> lx, ly;
    for (double r : radii) {
        Cloud mine;
        for (std::size_t i = 0; i < D.points.size(); ++i) {
            if (D.source_radii[i] != r) continue;
            int best = 0;
            for (std::size_t m = 1; m < means.size(); ++m)
                if ((D.points[i] - means[m]).norm() < (D.points[i] - means[static_cast<std::size_t>(best)]).norm()) best = static_cast<int>(m);
            if (best == c) mine.push_back(D.points[i]);
        }
        const double d = mine.size() < 2 ? 0.0 : diameter(mine);
        if (d <= 0.0) continue;
        lx.push_back(std::log(r));
        ly.push_back(std::log(d));
    }
    if (lx.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(lx.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n, my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// dim 0 when every cluster is tiny or shrinks under refinement; otherwise local-PCA rank voting at eta and eta/2.
inline DimensionResult dimension_estimate(const DirectionSample& D)
{
    DimensionResult r;
    const Cloud pts = D.estimate_points();
    if (pts.empty()) {
        r.dim = -1;
        r.confidence = 1.0;
        r.method = "empty";
        return r;
    }
    const double eta = D.eta;
    const std::vector<int> labels = detail::single_linkage(pts, eta);
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

    std::vector<int> lv;
    for (std::size_t i = 0; i < D.points.size(); ++i)
        if (D.level[i] >= 0) lv.push_back(D.level[i]);

    std::vector<Point> means(static_cast<std::size_t>(k), Point::Zero(D.n));
    for (std::size_t i = 0; i < pts.size(); ++i) means[static_cast<std::size_t>(labels[i])] += pts[i];
    for (auto& m : means) m = normalized(m);

    bool all_points = true;
    double worst_ratio = 0.0;
    double worst_beta = std::numeric_limits<double>::infinity();
    bool all_tiny = true;
    for (int c = 0; c < k; ++c) {
        Cloud all, coarse, fine;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (labels[i] != c) continue;
            all.push_back(pts[i]);
            (lv[i] == 0 ? coarse : fine).push_back(pts[i]);
        }
        const double dall = detail::diameter(all);
        if (dall <= 0.25 * eta) continue;
        all_tiny = false;
        if (D.unstable || coarse.size() < 2) {
            all_points = false;
            break;
        }
        // a cluster absent from the fine level vanished under refinement
        const double ratio = fine.size() < 2 ? 0.0 : detail::diameter(fine) / std::max(detail::diameter(coarse), 1e-300);
        worst_ratio = std::max(worst_ratio, ratio);
        const double beta = detail::shrink_exponent(D, means, c);
        worst_beta = std::isnan(beta) ? -std::numeric_limits<double>::infinity() : std::min(worst_beta, beta);
        if (ratio > 0.75) {
            all_points = false;
            break;
        }
    }
    if (all_points) {
        r.dim = 0;
        r.dim_coarse = r.dim_fine = 0;
        r.method = all_tiny ? "tiny-clusters" : "shrinking-clusters";
        // a steady power-law shrink over several shells is stronger evidence than one ratio
        const double by_ratio = std::clamp((0.85 - worst_ratio) / 0.25, 0.0, 1.0);
        const double by_slope = std::isfinite(worst_beta) ? std::clamp((worst_beta - 0.1) / 0.3, 0.0, 1.0) : 0.0;
        r.confidence = all_tiny ? 1.0 : std::max(by_ratio, by_slope);
    } else {
        const auto a = detail::rank_vote(pts, eta);
        const auto b = detail::rank_vote(pts, 0.5 * eta);
        r.dim_coarse = a.dim;
        r.dim_fine = b.dim;
        r.method = "local-pca";
        if (a.dim == b.dim) {
            r.dim = a.dim;
            r.confidence = std::min(a.agreement, b.agreement);
        } else {
            r.dim = a.agreement >= b.agreement ? a.dim : b.dim;
            r.confidence = 0.5 * std::min(a.agreement, b.agreement);
        }
        if (r.dim == 0) r.dim = 1;  // a non-shrinking cluster is not a point
        if (pts.size() < 50) r.confidence *= 0.5;
    }
    r.low_confidence = r.confidence < kConfidenceGate;
    return r;
}

inline void finalize(DirectionSample& D)
{
    const Cloud pts = D.estimate_points();
    const auto labels = detail::single_linkage(pts, D.eta);
    D.cluster.assign(D.points.size(), -1);
    std::size_t k = 0;
    for (std::size_t i = 0; i < D.points.size(); ++i)
        if (D.level[i] >= 0) D.cluster[i] = labels[k++];
    D.clusters = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    const auto dr = dimension_estimate(D);
    D.dim = dr.dim;
    D.confidence = dr.confidence;
    D.low_confidence = dr.low_confidence;
    if (dr.low_confidence) D.warnings.push_back("low confidence: scales eta and eta/2 disagree or too few points");
}

inline DirectionSample direction_set_estimate(const GermSet& A, const DirectionParams& p = {})
{
    const auto radii = p.schedule.radii();
    std::vector<Cloud> shells(radii.size());
    parallel_for(radii.size(), [&](std::size_t j) {
        Cloud c = A.sample(radii[j], p.per_shell, mix_seed(p.seed, j));
        for (auto& x : c) x = normalized(x);
        shells[j] = std::move(c);
    });

    DirectionSample D;
    D.n = A.dim();
    D.eta = p.eta;
    std::vector<int> nonempty;
    for (std::size_t j = 0; j < shells.size(); ++j)
        if (!shells[j].empty()) nonempty.push_back(static_cast<int>(j));
    if (nonempty.empty()) throw std::runtime_error("germ '" + A.name() + "' has no points on any shell (0 not adherent)");

    const int fine = nonempty.back();
    const int coarse = nonempty.size() >= 2 ? nonempty[nonempty.size() - 2] : -1;
    if (coarse >= 0) {
        const auto& c = shells[static_cast<std::size_t>(coarse)];
        const auto& f = shells[static_cast<std::size_t>(fine)];
        // drift beyond what the sampling gaps of either shell explain
        const double gap = std::max(detail::sampling_gap(c), detail::sampling_gap(f));
        D.drift = std::max(0.0, hausdorff(c, f) - gap);
    }
    D.unstable = D.drift > p.eta;
    if (D.unstable)
        D.warnings.push_back("unstable: consecutive-shell drift exceeds eta; all shells enter the estimate");

    for (std::size_t j = 0; j < shells.size(); ++j) {
        int lv = -1;
        if (static_cast<int>(j) == fine) lv = 1;
        else if (static_cast<int>(j) == coarse || D.unstable) lv = 0;
        for (auto& x : shells[j]) {
            D.points.push_back(x);
            D.source_radii.push_back(radii[j]);
            D.level.push_back(lv);
        }
    }
    finalize(D);
    return D;
}

/// Builds a sample directly from a point cloud on the sphere (single level).
inline DirectionSample direction_sample_from_cloud(const Cloud& pts, double eta, double radius = 1.0)
{
    DirectionSample D;
    D.n = pts.empty() ? 0 : static_cast<int>(pts.front().size());
    D.eta = eta;
    for (const auto& x : pts) {
        D.points.push_back(normalized(x));
        D.source_radii.push_back(radius);
        D.level.push_back(1);
    }
    finalize(D);
    return D;
}

/// LD(A) from its direction sample: tight clusters collapse to their mean direction,
/// extended ones keep every point plus midpoints of eta-neighbours.
inline GermSet tangent_cone(const DirectionSample& D, std::string name = "LD")
{
    const Cloud pts = D.estimate_points();
    if (pts.empty()) throw std::invalid_argument("tangent cone of an empty direction sample");
    std::vector<int> labels;
    for (std::size_t i = 0; i < D.points.size(); ++i)
        if (D.level[i] >= 0) labels.push_back(D.cluster[i]);
    Cloud reps;
    double resolution = 0.0;
    for (int c = 0; c < D.clusters; ++c) {
        Cloud mem;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (labels[i] == c) mem.push_back(pts[i]);
        const double diam = detail::diameter(mem);
        if (diam <= 0.25 * D.eta) {
            Point m = Point::Zero(D.n);
            for (const auto& x : mem) m += x;
            if (m.norm() > 0.0) {
                reps.push_back(normalized(m));
                resolution = std::max(resolution, diam);
                continue;
            }
        }
        for (const auto& x : mem) reps.push_back(x);
        resolution = std::max(resolution, detail::sampling_gap(mem));
        const HashGrid grid(mem, D.eta);
        for (std::size_t i = 0; i < mem.size() && reps.size() < 6000; ++i)
            grid.for_each_within(mem[i], D.eta, [&](std::size_t j) {
                if (j > i && (mem[i] + mem[j]).norm() > 0.0) reps.push_back(normalized(mem[i] + mem[j]));
            });
    }
    return cone(std::move(name), std::move(reps), D.eta, resolution);
}

/// Points of either cloud within `tau` of the other.
inline Cloud cloud_intersection(const Cloud& a, const Cloud& b, double tau)
{
    Cloud out;
    if (a.empty() || b.empty()) return out;
    const HashGrid ga(a, tau), gb(b, tau);
    for (const auto& x : a) {
        bool hit = false;
        gb.for_each_within(x, tau, [&](std::size_t) { hit = true; });
        if (hit) out.push_back(x);
    }
    for (const auto& y : b) {
        bool hit = false;
        ga.for_each_within(y, tau, [&](std::size_t) { hit = true; });
        if (hit) out.push_back(y);
    }
    return out;
}

namespace detail {

/// 90th percentile of nearest-neighbour distances: how finely a cloud resolves its set.
inline double resolution(const Cloud& pts)
{
    if (pts.size() < 2) return 0.0;
    std::vector<double> nn(pts.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double d = (pts[i] - pts[j]).norm();
            nn[i] = std::min(nn[i], d);
            nn[j] = std::min(nn[j], d);
        }
    const auto k = nn.begin() + static_cast<long>(0.9 * static_cast<double>(nn.size() - 1));
    std::nth_element(nn.begin(), k, nn.end());
    return *k;
}

}  // namespace detail

/// D(A) and D(B) intersected shell by shell. A point of one sample survives when it lies within
/// tau of the other sample, tau being the other sample's resolution (at least eta) and halved on
/// the fine level, so the intersection refines in both radius and thickness.
inline DirectionSample direction_intersection(const DirectionSample& DA, const DirectionSample& DB)
{
    const double eta = std::max(DA.eta, DB.eta);
    const Cloud a = DA.estimate_points(), b = DB.estimate_points();
    DirectionSample I;
    I.n = DA.n;
    I.eta = eta;
    const double ta = std::max(eta, detail::resolution(a)), tb = std::max(eta, detail::resolution(b));
    const HashGrid ga(a, ta), gb(b, tb);
    auto take = [&I](const DirectionSample& S, const Cloud& other, const HashGrid& grid, double tau) {
        if (other.empty()) return;
        for (std::size_t i = 0; i < S.points.size(); ++i) {
            bool hit = false;
            grid.for_each_within(S.points[i], S.level[i] == 1 ? 0.5 * tau : tau, [&](std::size_t) { hit = true; });
            if (!hit) continue;
            I.points.push_back(S.points[i]);
            I.source_radii.push_back(S.source_radii[i]);
            I.level.push_back(S.level[i]);
        }
    };
    take(DA, b, gb, tb);
    take(DB, a, ga, ta);
    for (const auto& w : DA.warnings) I.warnings.push_back("A: " + w);
    for (const auto& w : DB.warnings) I.warnings.push_back("B: " + w);
    I.unstable = DA.unstable || DB.unstable;
    finalize(I);
    return I;
}

struct IntersectionReport {
    int dim = -1;
    double confidence = 0.0;
    int dim_A = -1;
    int dim_B = -1;
    bool unstable = false;
    std::size_t points = 0;
    std::vector<std::string> warnings;
};

inline IntersectionReport direction_intersection_dim(const GermSet& A, const GermSet& B, const DirectionParams& p = {})
{
    const auto DA = direction_set_estimate(A, p);
    DirectionParams pb = p;
    pb.seed = mix_seed(p.seed, 0xB);
    const auto DB = direction_set_estimate(B, pb);
    const auto I = direction_intersection(DA, DB);
    IntersectionReport r;
    r.dim = I.dim;
    r.confidence = std::min({I.confidence, DA.confidence, DB.confidence});
    r.dim_A = DA.dim;
    r.dim_B = DB.dim;
    r.unstable = I.unstable;
    r.points = I.estimate_points().size();
    r.warnings = I.warnings;
    return r;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json to_json(const DirectionSample& D)
{
    json reps = json::array();
    std::map<int, std::pair<Point, int>> sums;
    for (std::size_t i = 0; i < D.points.size(); ++i) {
        if (D.level[i] < 0) continue;
        auto [it, fresh] = sums.try_emplace(D.cluster[i], Point::Zero(D.n), 0);
        it->second.first += D.points[i];
        ++it->second.second;
    }
    for (const auto& [c, s] : sums)
        reps.push_back({{"cluster", c}, {"size", s.second}, {"mean_direction", point_json(normalized(s.first))}});
    return {{"n", D.n},
            {"eta", D.eta},
            {"points", D.points.size()},
            {"estimate_points", D.estimate_points().size()},
            {"clusters", D.clusters},
            {"dim", D.dim},
            {"confidence", D.confidence},
            {"low_confidence", D.low_confidence},
            {"unstable", D.unstable},
            {"drift", D.drift},
            {"cluster_means", reps},
            {"warnings", D.warnings}};
}

inline json to_json(const IntersectionReport& r)
{
    return {{"dim", r.dim},     {"confidence", r.confidence}, {"dim_A", r.dim_A},       {"dim_B", r.dim_B},
            {"unstable", r.unstable}, {"points", r.points},   {"warnings", r.warnings}};
}

}  // namespace germlens
