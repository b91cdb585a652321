#pragma once

#include "germlens/directions.hpp"
#include "germlens/gauge.hpp"
#include "germlens/germ.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/maps.hpp"
#include "germlens/parallel.hpp"
#include "germlens/seatangle.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace germlens {

struct VolumeParams {
    long samples = 1000000;
    long pilot = 100000;              // uniform pilot size deciding the estimator
    double importance_below = 1e-3;   // pilot hit rate that switches to importance sampling
    double defensive = 0.1;           // uniform share of the importance proposal
    int anchor_cap = 20000;
    long budget = 200;                // distance budget per membership test
    std::uint64_t seed = 0;
};

struct VolEstimate {
    double value = 0.0;
    double ci_halfwidth = 0.0;  // 95%
    long n_samples = 0;
    double eps = 0.0;
    std::string gauge;
    std::uint64_t seed = 0;
    std::string estimator = "uniform";  // uniform | importance
    double indeterminate_fraction = 0.0;
    std::size_t anchors = 0;
    std::vector<std::string> warnings;
};

namespace detail {

constexpr int kBatch = 4096;

struct Accum {
    double sum = 0.0, sum2 = 0.0, undecided = 0.0;
    long n = 0, hits = 0, unknown = 0;
    void add(double w, Tri t)
    {
        ++n;
        double v = 0.0;
        if (t == Tri::Yes) {
            v = w;
            ++hits;
        } else if (t == Tri::Unknown) {
            v = 0.5 * w;
            ++unknown;
            undecided += 0.5 * w;
        }
        sum += v;
        sum2 += v * v;
    }
    void merge(const Accum& o)
    {
        sum += o.sum;
        sum2 += o.sum2;
        undecided += o.undecided;
        n += o.n;
        hits += o.hits;
        unknown += o.unknown;
    }
};

/// Runs `count` samples in fixed batches; each batch owns an RNG stream, merged in batch order.
template <class Draw>
Accum run_batches(long count, std::uint64_t seed, std::uint64_t stream, Draw&& draw_and_test)
{
    const std::size_t batches = static_cast<std::size_t>((count + kBatch - 1) / kBatch);
    std::vector<Accum> parts(batches);
    parallel_for(batches, [&](std::size_t b) {
        Rng rng = make_rng(mix_seed(seed, stream), b);
        const long lo = static_cast<long>(b) * kBatch, hi = std::min(count, lo + kBatch);
        Accum a;
        for (long i = lo; i < hi; ++i) draw_and_test(rng, a, static_cast<std::uint64_t>(i));
        parts[b] = a;
    });
    Accum total;
    for (const auto& p : parts) total.merge(p);
    return total;
}

struct Anchor {
    Point a;
    double rho = 0.0;
};

/// Points of A in eps/16 <= |a| <= eps spaced at most rho/2 apart per dyadic shell, rho = 2 theta(|a|)|a|.
/// Empty when the cap is hit: partial coverage would only inflate the variance.
inline std::vector<Anchor> make_anchors(const GermSet& A, const Gauge& theta, double eps, int cap, std::uint64_t seed)
{
    std::vector<Anchor> out;
    constexpr int kShells = 4;
    for (int j = 0; j < kShells; ++j) {
        const double hi = eps * std::pow(0.5, j), lo = 0.5 * hi;
        Rng rng = make_rng(seed, 0xA7C0 + static_cast<std::uint64_t>(j));
        std::vector<Anchor> shell;
        int rejected = 0, misses = 0;
        while (rejected < 200 && misses < 200 && static_cast<int>(out.size() + shell.size()) < cap) {
            const auto p = A.draw(lo, hi, rng);
            if (!p || p->norm() > eps || p->norm() == 0.0) {
                ++misses;
                continue;
            }
            const double an = p->norm();
            const double rho = 2.0 * theta(an) * an;
            bool near = false;
            for (const auto& s : shell)
                if ((s.a - *p).norm() <= 0.5 * std::min(rho, s.rho)) {
                    near = true;
                    break;
                }
            if (near) {
                ++rejected;
                continue;
            }
            rejected = 0;
            shell.push_back({*p, rho});
        }
        for (auto& s : shell) out.push_back(std::move(s));
        if (static_cast<int>(out.size()) >= cap) return {};
    }
    return out;
}

}  // namespace detail

/// Vol(ST_theta(A) within B_eps) by Monte Carlo.
inline VolEstimate vol_st_ball(const GermSet& A, const Gauge& theta, double eps, const VolumeParams& p = {})
{
    if (!(eps > 0.0) || eps > theta.t_max()) throw std::invalid_argument("eps must lie in (0, gauge domain]");
    const int n = A.dim();
    const double vball = ball_volume(n, eps);
    VolEstimate v;
    v.eps = eps;
    v.gauge = theta.str();
    v.seed = p.seed;
    auto test = [&](const Point& x, std::uint64_t i) {
        return st_check(x, A, theta, p.budget, mix_seed(p.seed, i), 1e-6, p.budget).value;
    };
    const long pilot = std::min(p.pilot, p.samples);
    detail::Accum uni = detail::run_batches(pilot, p.seed, 0x01, [&](Rng& rng, detail::Accum& a, std::uint64_t i) {
        a.add(vball, test(random_in_ball(rng, n, eps), i));
    });
    const double rate = static_cast<double>(uni.hits) / static_cast<double>(std::max(1L, uni.n));
    std::vector<detail::Anchor> anchors;
    if (rate < p.importance_below) {
        anchors = detail::make_anchors(A, theta, eps, p.anchor_cap, p.seed);
        if (anchors.empty()) v.warnings.push_back("hit rate is low but A could not be covered by anchors; uniform sampling kept");
    }

    detail::Accum acc;
    if (anchors.empty()) {
        acc = uni;
        if (p.samples > pilot) {
            acc.merge(detail::run_batches(p.samples - pilot, p.seed, 0x02, [&](Rng& rng, detail::Accum& a, std::uint64_t i) {
                a.add(vball, test(random_in_ball(rng, n, eps), static_cast<std::uint64_t>(pilot) + i));
            }));
        }
    } else {
        v.estimator = "importance";
        v.anchors = anchors.size();
        std::vector<double> cum;
        double vtot = 0.0, rmax = 0.0;
        Cloud centers;
        for (const auto& a : anchors) {
            vtot += ball_volume(n, a.rho);
            cum.push_back(vtot);
            rmax = std::max(rmax, a.rho);
            centers.push_back(a.a);
        }
        const HashGrid grid(centers, rmax);
        const double w0 = p.defensive;
        auto density = [&](const Point& x) {
            int cover = 0;
            grid.for_each_within(x, rmax, [&](std::size_t k) {
                if ((x - anchors[k].a).norm() <= anchors[k].rho) ++cover;
            });
            return w0 / vball + (1.0 - w0) * cover / vtot;
        };
        acc = detail::run_batches(p.samples, p.seed, 0x03, [&](Rng& rng, detail::Accum& a, std::uint64_t i) {
            Point x;
            if (uniform01(rng) < w0) {
                x = random_in_ball(rng, n, eps);
            } else {
                const double u = uniform01(rng) * vtot;
                const std::size_t k = std::min<std::size_t>(
                    static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin()), anchors.size() - 1);
                x = anchors[k].a + random_in_ball(rng, n, anchors[k].rho);
            }
            if (x.norm() > eps) {
                a.add(0.0, Tri::No);
                return;
            }
            a.add(1.0 / density(x), test(x, i));
        });
    }
    const double N = static_cast<double>(acc.n);
    v.n_samples = acc.n;
    v.value = acc.sum / N;
    const double var = std::max(0.0, acc.sum2 / N - v.value * v.value);
    v.indeterminate_fraction = static_cast<double>(acc.unknown) / N;
    // undecided points contribute half their weight; the other half widens the interval
    v.ci_halfwidth = 1.96 * std::sqrt(var / N) + acc.undecided / N;
    v.value = std::clamp(v.value, 0.0, vball);
    if (v.indeterminate_fraction > 0.1) v.warnings.push_back("more than 10% of samples are indeterminate; CI inflated");
    return v;
}

// ---------------------------------------------------------------------------------------------
// Ratio experiments

enum class RatioVerdict { DecaysToZero, Comparable, Increases, Inconclusive, Degenerate };

inline const char* to_string(RatioVerdict v)
{
    switch (v) {
    case RatioVerdict::DecaysToZero: return "decays-to-zero";
    case RatioVerdict::Comparable: return "comparable";
    case RatioVerdict::Increases: return "increases";
    case RatioVerdict::Inconclusive: return "inconclusive";
    case RatioVerdict::Degenerate: return "degenerate";
    }
    return "?";
}

struct RatioPoint {
    double eps = 0.0;
    double ratio = 0.0;
    double ci = 0.0;
    VolEstimate num, den;
};

struct RatioReport {
    std::vector<RatioPoint> points;
    double slope = 0.0;
    double K = 1.0;  // max(ratio, 1/ratio) over the schedule
    RatioVerdict verdict = RatioVerdict::Inconclusive;
    std::vector<std::string> warnings;
};

/// Default eps schedule 10^-1, 10^-1.25, ..., 10^-3.
inline std::vector<double> default_eps_schedule()
{
    std::vector<double> e;
    for (int k = 0; k <= 8; ++k) e.push_back(std::pow(10.0, -1.0 - 0.25 * k));
    return e;
}

namespace detail {

/// Longest run of consecutive steps moving in direction `sign` (within the combined CI).
inline int longest_run(const std::vector<RatioPoint>& pts, int sign)
{
    int best = pts.empty() ? 0 : 1, run = best;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = sign * (pts[i].ratio - pts[i - 1].ratio);
        if (d <= pts[i].ci + pts[i - 1].ci) ++run;
        else run = 1;
        best = std::max(best, run);
    }
    return best;
}

inline void classify(RatioReport& r)
{
    const auto& pts = r.points;
    if (pts.empty()) return;
    for (const auto& p : pts)
        if (p.den.value - p.den.ci_halfwidth <= 0.0) {
            r.verdict = RatioVerdict::Degenerate;
            r.warnings.push_back("denominator CI includes 0 at eps = " + std::to_string(p.eps));
            return;
        }
    std::vector<double> X, Y;
    double lo = INFINITY, hi = 0.0;
    for (const auto& p : pts) {
        if (p.ratio > 0.0) {
            X.push_back(std::log(p.eps));
            Y.push_back(std::log(p.ratio));
        }
        lo = std::min(lo, p.ratio);
        hi = std::max(hi, p.ratio);
    }
    if (X.size() >= 2) {
        const double n = static_cast<double>(X.size());
        const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n, my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            sxy += (X[i] - mx) * (Y[i] - my);
            sxx += (X[i] - mx) * (X[i] - mx);
        }
        r.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    r.K = lo > 0.0 ? std::max(hi, 1.0 / lo) : INFINITY;
    const double first = pts.front().ratio, last = pts.back().ratio;
    // eps decreases along the schedule
    if (pts.size() >= 4 && longest_run(pts, +1) >= 4 && last < 0.1 * first) r.verdict = RatioVerdict::DecaysToZero;
    else if (pts.size() >= 4 && longest_run(pts, -1) >= 4 && last > 10.0 * first) r.verdict = RatioVerdict::Increases;
    else if (lo > 0.0 && hi / lo <= 10.0) r.verdict = RatioVerdict::Comparable;
    else r.verdict = RatioVerdict::Inconclusive;
}

}  // namespace detail

/// Vol ST_theta_a(alpha) / Vol ST_theta_b(beta) along a decreasing eps schedule.
inline RatioReport ratio_curve(const GermSet& alpha, const Gauge& theta_a, const GermSet& beta, const Gauge& theta_b,
                               const std::vector<double>& eps, const VolumeParams& p = {})
{
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1])) throw std::invalid_argument("eps schedule must be strictly decreasing");
    RatioReport r;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        VolumeParams q = p;
        q.seed = mix_seed(p.seed, 0xE0 + i);
        RatioPoint pt;
        pt.eps = eps[i];
        pt.num = vol_st_ball(alpha, theta_a, eps[i], q);
        q.seed = mix_seed(p.seed, 0xF0 + i);
        pt.den = vol_st_ball(beta, theta_b, eps[i], q);
        pt.ratio = pt.den.value > 0.0 ? pt.num.value / pt.den.value : INFINITY;
        const double ra = pt.num.value > 0.0 ? pt.num.ci_halfwidth / pt.num.value : 0.0;
        const double rb = pt.den.value > 0.0 ? pt.den.ci_halfwidth / pt.den.value : INFINITY;
        pt.ci = pt.ratio * std::hypot(ra, rb);
        for (const auto& w : pt.num.warnings) r.warnings.push_back("numerator: " + w);
        for (const auto& w : pt.den.warnings) r.warnings.push_back("denominator: " + w);
        r.points.push_back(std::move(pt));
    }
    detail::classify(r);
    return r;
}

inline RatioReport ratio_curve(const GermSet& alpha, const GermSet& beta, const Gauge& theta, const std::vector<double>& eps,
                               const VolumeParams& p = {})
{
    return ratio_curve(alpha, theta, beta, theta, eps, p);
}

/// Vol ST_{c theta}(A) / Vol ST_theta(A).
inline RatioReport ctimes_check(const GermSet& A, const Gauge& theta, double c, const std::vector<double>& eps,
                                const VolumeParams& p = {})
{
    if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
    return ratio_curve(A, Gauge::scaled(theta, c, 1.0), A, theta, eps, p);
}

/// Vol ST_theta(A) / Vol ST_theta(B); comparable is expected for ST-equivalent germs.
inline RatioReport st_volume_equiv_check(const GermSet& A, const GermSet& B, const Gauge& theta,
                                         const std::vector<double>& eps, const VolumeParams& p = {})
{
    return ratio_curve(A, B, theta, eps, p);
}

// ---------------------------------------------------------------------------------------------
// Dimension checks

struct DimInequalityReport {
    int dim_E = -1;   // dim D(A)
    int dim_F = -1;   // dim D(h(LD(A)))
    bool holds = false;
    bool abstain = false;
    double confidence = 0.0;
    std::vector<std::string> warnings;
};

/// dim D(h(LD(A))) <= dim D(A).
inline DimInequalityReport dim_inequality_check(const LipschitzMap& h, const GermSet& A, const DirectionParams& p = {})
{
    DimInequalityReport r;
    const auto DA = direction_set_estimate(A, p);
    const GermSet E = tangent_cone(DA, "LD(" + A.name() + ")");
    DirectionParams q = p;
    q.seed = mix_seed(p.seed, 0xF);
    const auto DF = direction_set_estimate(mapped(E, h), q);
    r.dim_E = DA.dim;
    r.dim_F = DF.dim;
    r.confidence = std::min(DA.confidence, DF.confidence);
    r.abstain = r.confidence < kConfidenceGate;
    r.holds = r.dim_F <= r.dim_E;
    for (const auto& w : DA.warnings) r.warnings.push_back("D(A): " + w);
    for (const auto& w : DF.warnings) r.warnings.push_back("D(F): " + w);
    return r;
}

struct InvariantReport {
    int dim_before = -1;  // dim D(A) intersected with D(B)
    int dim_after = -1;   // dim D(h(A)) intersected with D(h(B))
    bool equal = false;
    bool abstain = false;
    double confidence = 0.0;
    IntersectionReport before, after;
    std::vector<std::string> warnings;
};

/// Directional-intersection dimension before and after h.
inline InvariantReport invariant_check(const LipschitzMap& h, const GermSet& A, const GermSet& B,
                                       const DirectionParams& p = {})
{
    InvariantReport r;
    r.before = direction_intersection_dim(A, B, p);
    DirectionParams q = p;
    q.seed = mix_seed(p.seed, 0x1F);
    r.after = direction_intersection_dim(mapped(A, h), mapped(B, h), q);
    r.dim_before = r.before.dim;
    r.dim_after = r.after.dim;
    r.equal = r.dim_before == r.dim_after;
    r.confidence = std::min(r.before.confidence, r.after.confidence);
    r.abstain = r.confidence < kConfidenceGate;
    for (const auto& w : r.before.warnings) r.warnings.push_back("before: " + w);
    for (const auto& w : r.after.warnings) r.warnings.push_back("after: " + w);
    return r;
}

/// Local-PCA dimension of A itself from raw shell samples (no normalisation).
inline int sample_dimension(const GermSet& A, double r, int count, std::uint64_t seed)
{
    const Cloud pts = A.sample(r, count, seed);
    if (pts.size() < 3) return pts.empty() ? -1 : 0;
    const int n = A.dim();
    const double radius = 0.2 * r;
    const HashGrid grid(pts, radius);
    std::map<int, int> votes;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::vector<std::size_t> nb;
        grid.for_each_within(pts[i], radius, [&](std::size_t j) { nb.push_back(j); });
        if (nb.size() < 4) continue;
        Point mean = Point::Zero(n);
        for (auto j : nb) mean += pts[j];
        mean /= static_cast<double>(nb.size());
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
        for (auto j : nb) cov += (pts[j] - mean) * (pts[j] - mean).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        const auto& ev = es.eigenvalues();
        int rank = 0;
        for (int k = 0; k < n; ++k)
            if (ev[k] > 0.05 * ev[n - 1]) ++rank;
        ++votes[rank];
    }
    int best = 0, dim = 0;
    for (auto [d, c] : votes)
        if (c > best) {
            best = c;
            dim = d;
        }
    return dim;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json to_json(const VolEstimate& v)
{
    return {{"value", v.value},         {"ci_halfwidth", v.ci_halfwidth}, {"n_samples", v.n_samples},
            {"eps", v.eps},             {"gauge", v.gauge},               {"seed", v.seed},
            {"estimator", v.estimator}, {"indeterminate_fraction", v.indeterminate_fraction},
            {"anchors", v.anchors},     {"warnings", v.warnings}};
}

inline json to_json(const RatioReport& r)
{
    json pts = json::array();
    for (const auto& p : r.points)
        pts.push_back({{"eps", p.eps}, {"ratio", num(p.ratio)}, {"ci", num(p.ci)}, {"numerator", to_json(p.num)},
                       {"denominator", to_json(p.den)}});
    return {{"points", pts}, {"slope", r.slope}, {"K", num(r.K)}, {"verdict", to_string(r.verdict)}, {"warnings", r.warnings}};
}

inline json to_json(const InvariantReport& r)
{
    return {{"dim_before", r.dim_before}, {"dim_after", r.dim_after},   {"equal", r.equal},
            {"abstain", r.abstain},       {"confidence", r.confidence}, {"before", to_json(r.before)},
            {"after", to_json(r.after)},  {"warnings", r.warnings}};
}

inline json to_json(const DimInequalityReport& r)
{
    return {{"dim_E", r.dim_E},       {"dim_F", r.dim_F},           {"holds", r.holds},
            {"abstain", r.abstain},   {"confidence", r.confidence}, {"warnings", r.warnings}};
}

}  // namespace germlens
