#pragma once

#include "germlens/directions.hpp"
#include "germlens/germ.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/maps.hpp"
#include "germlens/parallel.hpp"

#include <string>
#include <vector>

namespace germlens {

/// Probe configuration. "x close to y" is read as |x - y| <= eps |x|.
struct SSPConfig {
    std::vector<double> eps{0.4, 0.2, 0.1};
    Schedule schedule;          // probe radii; delta grid = radii of the finest `finest` shells
    int finest = 6;
    int rays = 24;              // probe directions per eps
    int random_per_ray = 4;     // extra probes at random norms below delta
    double wssp_fraction = 0.5; // share of the finest shells a ray must succeed on
    long budget = kDefaultDistanceBudget;
    std::uint64_t seed = 0;
};

inline void validate(const SSPConfig& c)
{
    if (c.eps.empty()) throw std::invalid_argument("eps grid is empty");
    for (std::size_t i = 1; i < c.eps.size(); ++i)
        if (!(c.eps[i] < c.eps[i - 1])) throw std::invalid_argument("eps grid must be strictly decreasing");
    if (c.finest < 2 || c.finest > c.schedule.shells) throw std::invalid_argument("finest must be in [2, shells]");
    if (c.rays < 1) throw std::invalid_argument("need at least one probe ray");
}

struct Probe {
    Point x;
    int ray = 0;
    int shell = -1;     // index into the schedule, -1 for random-norm probes
    double gap = 0.0;   // best |x - y| / |x| found
    Point best_y;
};

struct SSPCell {
    double eps = 0.0;
    double delta = 0.0;
    std::size_t probes = 0;
    std::size_t failures = 0;
    double worst_gap = 0.0;
};

struct RayResult {
    double eps = 0.0;
    int ray = 0;
    Point direction;
    int successes = 0;
    int shells = 0;
    bool pass = false;
};

struct SSPReport {
    std::string verdict = "abstain";  // pass | fail | abstain
    std::string wssp_verdict = "abstain";
    std::vector<SSPCell> cells;
    std::vector<Probe> counterexamples;
    std::vector<RayResult> rays;
    std::vector<std::string> notes;
};

/// Relative gap dist(x, A)/|x| from the upper distance bound; the search stops once the gap is <= `enough`.
inline void measure(Probe& p, const GermSet& A, long budget, std::uint64_t seed, double enough = -1.0)
{
    const double xn = p.x.norm();
    const auto d = distance_estimate(p.x, A, budget, seed, enough * xn);
    p.gap = d.upper / xn;
    p.best_y = d.witness ? *d.witness : Point(Point::Zero(p.x.size()));
}

namespace detail {

/// Probe directions for one eps: D points jittered by at most eps/2.
inline Cloud probe_directions(const DirectionSample& D, double eps, int rays, Rng& rng)
{
    const Cloud pts = D.estimate_points();
    Cloud out;
    for (int r = 0; r < rays; ++r) {
        const Point& d = pts[rng() % pts.size()];
        out.push_back(random_in_cap(rng, d, 0.5 * eps));
    }
    return out;
}

struct ProbeSet {
    double eps = 0.0;
    Cloud directions;
    std::vector<Probe> probes;
};

inline std::vector<ProbeSet> build_probes(const GermSet& A, const DirectionSample& D, const SSPConfig& c)
{
    const auto radii = c.schedule.radii();
    const std::size_t first = radii.size() - static_cast<std::size_t>(c.finest);
    std::vector<ProbeSet> sets(c.eps.size());
    for (std::size_t e = 0; e < c.eps.size(); ++e) {
        Rng rng = make_rng(c.seed, 0x55F0 + e);
        ProbeSet s;
        s.eps = c.eps[e];
        s.directions = probe_directions(D, c.eps[e], c.rays, rng);
        for (int r = 0; r < c.rays; ++r) {
            const Point& d = s.directions[static_cast<std::size_t>(r)];
            for (std::size_t j = first; j < radii.size(); ++j) s.probes.push_back({radii[j] * d, r, static_cast<int>(j), 0.0, {}});
            for (int k = 0; k < c.random_per_ray; ++k)
                s.probes.push_back({uniform(rng, 0.25, 1.0) * radii[first] * d, r, -1, 0.0, {}});
        }
        sets[e] = std::move(s);
    }
    std::vector<Probe*> all;
    for (auto& s : sets)
        for (auto& p : s.probes) all.push_back(&p);
    // a gap below the smallest eps decides every cell
    const double enough = *std::min_element(c.eps.begin(), c.eps.end());
    parallel_for(all.size(), [&](std::size_t i) { measure(*all[i], A, c.budget, mix_seed(c.seed, 0xA000 + i), enough); });
    return sets;
}

}  // namespace detail

/// SSP probe: for every eps in the grid, every probe below the finest deltas finds y in A with |x - y| <= eps |x|.
/// WSSP proxy on the same probes: along each ray, at least `wssp_fraction` of the finest shells succeed.
inline SSPReport ssp_probe(const GermSet& A, const DirectionSample& D, const SSPConfig& c = {})
{
    validate(c);
    SSPReport rep;
    if (D.empty()) {
        rep.notes.push_back("direction sample is empty");
        return rep;
    }
    const auto radii = c.schedule.radii();
    const std::size_t first = radii.size() - static_cast<std::size_t>(c.finest);
    if (A.sample(radii.back(), 1, c.seed).empty()) {
        rep.notes.push_back("sampler cannot reach the finest shell");
        return rep;
    }
    const auto sets = detail::build_probes(A, D, c);
    bool ssp = true, wssp = true;
    for (const auto& s : sets) {
        // delta cells: probes with |x| <= radii[j]
        for (std::size_t j = first; j < radii.size(); ++j) {
            SSPCell cell;
            cell.eps = s.eps;
            cell.delta = radii[j];
            for (const auto& p : s.probes) {
                if (p.x.norm() > radii[j] * (1 + 1e-12)) continue;
                ++cell.probes;
                cell.worst_gap = std::max(cell.worst_gap, p.gap);
                if (p.gap > s.eps) ++cell.failures;
            }
            rep.cells.push_back(cell);
        }
        for (const auto& p : s.probes)
            if (p.gap > s.eps) {
                ssp = false;
                if (rep.counterexamples.size() < 200) rep.counterexamples.push_back(p);
            }
        for (int r = 0; r < c.rays; ++r) {
            RayResult rr;
            rr.eps = s.eps;
            rr.ray = r;
            rr.direction = s.directions[static_cast<std::size_t>(r)];
            for (const auto& p : s.probes)
                if (p.ray == r && p.shell >= 0) {
                    ++rr.shells;
                    if (p.gap <= s.eps) ++rr.successes;
                }
            rr.pass = rr.successes >= c.wssp_fraction * rr.shells;
            wssp = wssp && rr.pass;
            rep.rays.push_back(rr);
        }
    }
    rep.verdict = ssp ? "pass" : "fail";
    rep.wssp_verdict = wssp ? "pass" : "fail";
    rep.notes.push_back("WSSP subsequences are proxied by a fraction of the finest shells");
    return rep;
}

/// WSSP verdict alone (same probes as ssp_probe).
inline std::string wssp_probe(const GermSet& A, const DirectionSample& D, const SSPConfig& c = {})
{
    return ssp_probe(A, D, c).wssp_verdict;
}

/// Annuli at every other shell of the schedule (continued past its end): dense in direction, missing at odd shells.
inline GermSet alternating_toy(int n, const Schedule& s, double thickness = 0.9)
{
    const auto radii = Schedule{s.r0, s.ratio, 2 * s.shells + 2}.radii();
    std::vector<std::pair<double, double>> bands;
    for (std::size_t j = 0; j < radii.size(); j += 2) bands.emplace_back(thickness * radii[j], radii[j]);
    auto project = [bands](double r) {
        double best = bands.front().second, bd = std::fabs(r - best);
        for (const auto& [lo, hi] : bands) {
            const double c = std::clamp(r, lo, hi);
            if (std::fabs(r - c) < bd) {
                bd = std::fabs(r - c);
                best = c;
            }
        }
        // the origin is in the closure
        if (r < bd) return 0.0;
        return best;
    };
    auto member = [bands](const Point& x, double tol) {
        const double r = x.norm();
        for (const auto& [lo, hi] : bands)
            if (r >= lo * (1 - tol) && r <= hi * (1 + tol)) return true;
        return false;
    };
    auto draw = [bands, n](double lo, double hi, Rng& rng) -> std::optional<Point> {
        std::vector<std::pair<double, double>> hit;
        for (const auto& [a, b] : bands) {
            const double l = std::max(a, lo), h = std::min(b, hi);
            if (l <= h) hit.emplace_back(l, h);
        }
        if (hit.empty()) return std::nullopt;
        const auto& [l, h] = hit[rng() % hit.size()];
        return uniform(rng, l, h) * random_unit(rng, n);
    };
    auto foot = [project](const Point& x) -> std::optional<Point> {
        const double r = x.norm();
        if (r == 0.0) return x;
        return Point(x * (project(r) / r));
    };
    return custom("alternating_toy", n, member, draw, foot);
}

// ---------------------------------------------------------------------------------------------
// LD image check

struct LDImageReport {
    double gap = 0.0;
    double eta = 0.0;
    bool pass = false;
    int dim_hA = -1;
    int dim_hLD = -1;
    bool unstable = false;
    std::vector<std::string> warnings;
};

/// Sphere-Hausdorff distance between D(h(A)) and D(h(LD(A))).
inline LDImageReport ld_image_check(const LipschitzMap& h, const GermSet& A, const DirectionParams& p = {})
{
    LDImageReport r;
    r.eta = p.eta;
    const auto DA = direction_set_estimate(A, p);
    const GermSet LD = tangent_cone(DA, "LD(" + A.name() + ")");
    DirectionParams q = p;
    q.seed = mix_seed(p.seed, 0x1D);
    const auto D1 = direction_set_estimate(mapped(A, h), q);
    const auto D2 = direction_set_estimate(mapped(LD, h), q);
    r.gap = hausdorff(D1.estimate_points(), D2.estimate_points());
    r.dim_hA = D1.dim;
    r.dim_hLD = D2.dim;
    r.unstable = DA.unstable || D1.unstable || D2.unstable;
    for (const auto& w : D1.warnings) r.warnings.push_back("h(A): " + w);
    for (const auto& w : D2.warnings) r.warnings.push_back("h(LD(A)): " + w);
    r.pass = r.gap <= r.eta;
    return r;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json to_json(const SSPReport& r)
{
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"eps", c.eps}, {"delta", c.delta}, {"probes", c.probes}, {"failures", c.failures},
                         {"pass_rate", c.probes ? 1.0 - static_cast<double>(c.failures) / c.probes : 1.0},
                         {"worst_gap", num(c.worst_gap)}});
    json ce = json::array();
    for (const auto& p : r.counterexamples)
        ce.push_back({{"x", point_json(p.x)}, {"best_y", point_json(p.best_y)}, {"gap", num(p.gap)}});
    json rays = json::array();
    for (const auto& x : r.rays)
        rays.push_back({{"eps", x.eps}, {"ray", x.ray}, {"direction", point_json(x.direction)}, {"successes", x.successes},
                        {"shells", x.shells}, {"pass", x.pass}});
    return {{"ssp", r.verdict}, {"wssp", r.wssp_verdict}, {"cells", cells}, {"counterexamples", ce}, {"rays", rays}, {"notes", r.notes}};
}

inline json to_json(const LDImageReport& r)
{
    return {{"gap", r.gap},         {"eta", r.eta},       {"pass", r.pass},         {"dim_hA", r.dim_hA},
            {"dim_hLD", r.dim_hLD}, {"unstable", r.unstable}, {"warnings", r.warnings}};
}

}  // namespace germlens
