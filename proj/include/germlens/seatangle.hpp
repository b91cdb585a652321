#pragma once

#include "germlens/gauge.hpp"
#include "germlens/germ.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/maps.hpp"
#include "germlens/parallel.hpp"

#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace germlens {

enum class Tri { Yes, No, Unknown };

inline const char* to_string(Tri t)
{
    switch (t) {
    case Tri::Yes: return "true";
    case Tri::No: return "false";
    case Tri::Unknown: return "indeterminate";
    }
    return "?";
}

struct STParams {
    Schedule schedule;
    int per_shell = 40;
    int finest = 6;  // shells, counted from the finest, that decide inclusion
    long budget = kDefaultDistanceBudget;
    long max_budget = 64000;
    double band = 1e-6;  // relative threshold band
    std::uint64_t seed = 0;
};

/// Membership test with the distance ratio bounds dist / (theta(|x|) |x|).
struct STCheck {
    Tri value = Tri::Unknown;
    double ratio_lower = 0.0;
    double ratio_upper = 0.0;
    std::optional<Point> witness;
};

/// dist(x, A) <= theta(|x|) |x|, three-valued. Distances within A's resolution count as zero.
inline STCheck st_check(const Point& x, const GermSet& A, const Gauge& theta, long budget = kDefaultDistanceBudget,
                        std::uint64_t seed = 0, double band = 1e-6, long max_budget = 64000)
{
    STCheck out;
    const double r = x.norm();
    if (r == 0.0) {
        out.value = Tri::Yes;
        return out;
    }
    const double T = theta(r) * r;
    const double slack = A.resolution() * r;
    for (long b = std::max(budget, kMinDistanceBudget);; b *= 4) {
        const auto d = distance_estimate(x, A, b, seed, T * (1.0 - band) + slack);
        const double lo = std::max(0.0, d.lower - slack), hi = std::max(0.0, d.upper - slack);
        out.ratio_lower = lo / T;
        out.ratio_upper = hi / T;
        out.witness = d.witness;
        if (hi == 0.0 || hi <= T * (1.0 - band)) {
            out.value = Tri::Yes;
            return out;
        }
        if (lo > T * (1.0 + band)) {
            out.value = Tri::No;
            return out;
        }
        if (d.exact || !d.exhausted || b >= max_budget) {
            out.value = Tri::Unknown;
            return out;
        }
    }
}

inline Tri st_contains(const Point& x, const GermSet& A, const Gauge& theta, long budget = kDefaultDistanceBudget,
                       std::uint64_t seed = 0)
{
    return st_check(x, A, theta, budget, seed).value;
}

/// theta1(t) = (K2/K1) theta(t/K1), theta2(t) = (K1/K2) theta(t/K2).
inline std::pair<Gauge, Gauge> sandwich_gauges(const Gauge& theta, double K1, double K2)
{
    if (!(K1 > 0.0) || !(K1 <= K2)) throw std::invalid_argument("sandwich needs 0 < K1 <= K2");
    return {Gauge::scaled(theta, K2 / K1, K1), Gauge::scaled(theta, K1 / K2, K2)};
}

enum class STRelation { Included, NotIncluded, Equivalent, NotEquivalent, Abstain };

inline const char* to_string(STRelation r)
{
    switch (r) {
    case STRelation::Included: return "included";
    case STRelation::NotIncluded: return "not-included";
    case STRelation::Equivalent: return "equivalent";
    case STRelation::NotEquivalent: return "not-equivalent";
    case STRelation::Abstain: return "abstain";
    }
    return "?";
}

struct Counterexample {
    Point x;
    double ratio = 0.0;  // lower bound of dist / (theta(|x|) |x|)
    double radius = 0.0;
};

struct STVerdict {
    STRelation relation = STRelation::Abstain;
    std::optional<std::pair<Gauge, Gauge>> witness_gauges;
    std::vector<Counterexample> counterexamples;
    int shells_checked = 0;
    double max_ratio = 0.0;  // over decided points, upper bounds
    std::size_t decided = 0;
    std::size_t indeterminate = 0;
    std::string failed_direction;
    std::vector<std::string> warnings;
};

/// A subset of ST_theta(B) on the finest `p.finest` shells of the schedule.
inline STVerdict st_inclusion_test(const GermSet& A, const GermSet& B, const Gauge& theta, const STParams& p = {})
{
    if (A.dim() != B.dim()) throw std::invalid_argument("germs live in different dimensions");
    if (p.schedule.r0 > theta.t_max()) throw std::invalid_argument("schedule leaves the gauge domain");
    const auto radii = p.schedule.radii();
    const std::size_t first = radii.size() - static_cast<std::size_t>(std::clamp(p.finest, 1, static_cast<int>(radii.size())));
    struct Shell {
        std::vector<STCheck> checks;
        Cloud pts;
    };
    std::vector<Shell> shells(radii.size() - first);
    parallel_for(shells.size(), [&](std::size_t k) {
        const std::size_t j = first + k;
        Shell s;
        s.pts = A.sample(radii[j], p.per_shell, mix_seed(p.seed, 0x5E00 + j));
        for (std::size_t i = 0; i < s.pts.size(); ++i)
            s.checks.push_back(st_check(s.pts[i], B, theta, p.budget, mix_seed(p.seed, j * 7919 + i), p.band, p.max_budget));
        shells[k] = std::move(s);
    });
    STVerdict v;
    std::size_t total = 0;
    for (const auto& s : shells) {
        if (!s.pts.empty()) ++v.shells_checked;
        for (std::size_t i = 0; i < s.pts.size(); ++i) {
            ++total;
            const auto& c = s.checks[i];
            if (c.value == Tri::Unknown) {
                ++v.indeterminate;
                continue;
            }
            ++v.decided;
            if (c.value == Tri::Yes) v.max_ratio = std::max(v.max_ratio, c.ratio_upper);
            else v.counterexamples.push_back({s.pts[i], c.ratio_lower, s.pts[i].norm()});
        }
    }
    if (total == 0) {
        v.warnings.push_back("A has no sampled points on the tested shells");
        return v;
    }
    if (static_cast<double>(v.indeterminate) > 0.05 * static_cast<double>(total)) {
        v.warnings.push_back("more than 5% of points are indeterminate");
        return v;
    }
    v.relation = v.counterexamples.empty() ? STRelation::Included : STRelation::NotIncluded;
    return v;
}

// ---------------------------------------------------------------------------------------------
// Gauge fitting

enum class FitStatus { Fit, NoMonomialGauge, ZeroDistance, Empty };

inline const char* to_string(FitStatus s)
{
    switch (s) {
    case FitStatus::Fit: return "fit";
    case FitStatus::NoMonomialGauge: return "no monomial gauge";
    case FitStatus::ZeroDistance: return "zero distance";
    case FitStatus::Empty: return "empty";
    }
    return "?";
}

struct ShellG {
    double radius = 0.0;
    double max_g = 0.0;
    std::size_t samples = 0;
    bool used = false;
    double residual = 0.0;
};

struct GaugeFit {
    FitStatus status = FitStatus::Empty;
    std::optional<Gauge> gauge;  // 2 C t^alpha
    double alpha = 0.0;
    double C = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
    double resolution = 0.0;
    std::vector<ShellG> shells;
    std::vector<std::string> warnings;
};

constexpr double kGaugeFloor = 1e-10;
constexpr double kMinDecaySlope = 0.02;

/// Fits max_x dist(x, B)/|x| over each shell of A by C r^alpha (log-log least squares, envelope C).
inline GaugeFit gauge_fit(const GermSet& A, const GermSet& B, const STParams& p = {})
{
    if (A.dim() != B.dim()) throw std::invalid_argument("germs live in different dimensions");
    const auto radii = p.schedule.radii();
    GaugeFit f;
    f.resolution = B.resolution();
    f.shells.resize(radii.size());
    parallel_for(radii.size(), [&](std::size_t j) {
        const Cloud pts = A.sample(radii[j], p.per_shell, mix_seed(p.seed, 0xF100 + j));
        ShellG s;
        s.radius = radii[j];
        s.samples = pts.size();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double xn = pts[i].norm();
            const auto d = distance_estimate(pts[i], B, p.budget, mix_seed(p.seed, j * 104729 + i));
            s.max_g = std::max(s.max_g, std::max(0.0, d.upper - f.resolution * xn) / xn);
        }
        f.shells[j] = s;
    });
    std::vector<double> X, Y;
    std::size_t nonempty = 0;
    for (auto& s : f.shells) {
        if (s.samples == 0) continue;
        ++nonempty;
        if (s.max_g <= kGaugeFloor) continue;
        s.used = true;
        X.push_back(std::log(s.radius));
        Y.push_back(std::log(s.max_g));
    }
    if (nonempty == 0) {
        f.warnings.push_back("A has no sampled points");
        return f;
    }
    if (X.size() < 2) {
        f.status = FitStatus::ZeroDistance;
        f.gauge = Gauge::monomial(1.0, 1.0, std::max(1.0, 2.0 * p.schedule.r0));
        if (!X.empty()) f.warnings.push_back("only one shell above the distance floor");
        return f;
    }
    const double n = static_cast<double>(X.size());
    const double mx = std::accumulate(X.begin(), X.end(), 0.0) / n, my = std::accumulate(Y.begin(), Y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        sxy += (X[i] - mx) * (Y[i] - my);
        sxx += (X[i] - mx) * (X[i] - mx);
    }
    f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    for (auto& s : f.shells)
        if (s.used) s.residual = std::log(s.max_g) - (f.intercept + f.slope * std::log(s.radius));
    if (f.slope <= kMinDecaySlope) {
        f.status = FitStatus::NoMonomialGauge;
        f.warnings.push_back("dist/|x| does not decay (log-log slope " + std::to_string(f.slope) + ")");
        return f;
    }
    f.alpha = f.slope;
    for (const auto& s : f.shells)
        if (s.used) f.C = std::max(f.C, s.max_g / std::pow(s.radius, f.alpha));
    f.status = FitStatus::Fit;
    f.gauge = Gauge::monomial(2.0 * f.C, f.alpha, std::max(1.0, 2.0 * p.schedule.r0));
    return f;
}

/// Searches monomial gauges theta1, theta2 with B in ST_theta1(A) and A in ST_theta2(B).
inline STVerdict st_equivalence_search(const GermSet& A, const GermSet& B, const STParams& p = {})
{
    const double t_max = std::max(1.0, 2.0 * p.schedule.r0);
    struct Direction {
        STVerdict check;
        std::optional<Gauge> gauge;
    };
    auto one = [&](const GermSet& X, const GermSet& Y, std::uint64_t salt) {
        STParams q = p;
        q.seed = mix_seed(p.seed, salt);
        const auto fit = gauge_fit(X, Y, q);
        std::vector<Gauge> candidates;
        if (fit.gauge) {
            candidates.push_back(*fit.gauge);
            if (fit.status == FitStatus::Fit) {
                candidates.push_back(Gauge::monomial(8.0 * fit.C, fit.alpha, t_max));
                candidates.push_back(Gauge::monomial(2.0 * fit.C, 0.5 * fit.alpha, t_max));
            }
        } else {
            candidates.push_back(Gauge::monomial(1.0, 0.05, t_max));
        }
        Direction d;
        for (const auto& g : candidates) {
            STParams v = p;
            v.seed = mix_seed(p.seed, salt + 1);
            d.check = st_inclusion_test(X, Y, g, v);
            if (d.check.relation == STRelation::Included && fit.gauge) {
                d.gauge = g;
                break;
            }
        }
        if (!fit.gauge && d.check.relation == STRelation::Included) d.check.relation = STRelation::NotIncluded;
        for (const auto& w : fit.warnings) d.check.warnings.push_back(w);
        return d;
    };
    const auto d1 = one(B, A, 0x51);
    const auto d2 = one(A, B, 0x52);
    STVerdict v;
    v.shells_checked = std::max(d1.check.shells_checked, d2.check.shells_checked);
    v.decided = d1.check.decided + d2.check.decided;
    v.indeterminate = d1.check.indeterminate + d2.check.indeterminate;
    v.max_ratio = std::max(d1.check.max_ratio, d2.check.max_ratio);
    for (const auto& w : d1.check.warnings) v.warnings.push_back("B in ST(A): " + w);
    for (const auto& w : d2.check.warnings) v.warnings.push_back("A in ST(B): " + w);
    if (d1.gauge && d2.gauge) {
        v.relation = STRelation::Equivalent;
        v.witness_gauges = std::make_pair(*d1.gauge, *d2.gauge);
        return v;
    }
    const bool abstained = (!d1.gauge && d1.check.relation == STRelation::Abstain) ||
                           (!d2.gauge && d2.check.relation == STRelation::Abstain);
    v.relation = abstained ? STRelation::Abstain : STRelation::NotEquivalent;
    if (!d1.gauge) {
        v.failed_direction = "B in ST(A)";
        v.counterexamples = d1.check.counterexamples;
    }
    if (!d2.gauge) {
        v.failed_direction = v.failed_direction.empty() ? "A in ST(B)" : "both";
        v.counterexamples.insert(v.counterexamples.end(), d2.check.counterexamples.begin(), d2.check.counterexamples.end());
    }
    return v;
}

// ---------------------------------------------------------------------------------------------
// Sandwich property under a bi-Lipschitz map

struct SandwichReport {
    std::size_t attempted = 0;
    std::size_t decided = 0;
    std::size_t passed = 0;
    std::size_t indeterminate = 0;
    std::vector<Point> failures;
    Gauge theta1;
    Gauge theta2;
};

/// Draws points x of ST_theta(A) and checks h(x) against ST_theta1(h(A)).
inline SandwichReport sandwich_check(const GermSet& A, const LipschitzMap& h, const Gauge& theta, int count,
                                     const STParams& p = {})
{
    if (!h.bi_lipschitz()) throw std::invalid_argument("sandwich check needs a bi-Lipschitz map");
    const auto [t1, t2] = sandwich_gauges(theta, *h.K1, *h.K2);
    SandwichReport rep{0, 0, 0, 0, {}, t1, t2};
    const GermSet hA = mapped(A, h);
    const auto radii = p.schedule.radii();
    const std::size_t batches = radii.size();
    struct Batch {
        std::size_t attempted = 0, decided = 0, passed = 0, indeterminate = 0;
        std::vector<Point> failures;
    };
    std::vector<Batch> out(batches);
    const int per = (count + static_cast<int>(batches) - 1) / static_cast<int>(batches);
    parallel_for(batches, [&](std::size_t j) {
        Batch b;
        Rng rng = make_rng(p.seed, 0x5A00 + j);
        const Cloud base = A.sample(radii[j], per, mix_seed(p.seed, 0x5B00 + j));
        for (std::size_t i = 0; i < base.size(); ++i) {
            const Point& a = base[i];
            // candidate within theta(|a|/2)|a|/2 of a stays in ST_theta(A) since |x| >= |a|/2
            const double rad = 0.5 * theta(0.5 * a.norm()) * a.norm();
            const Point x = a + random_in_ball(rng, static_cast<int>(a.size()), rad);
            const auto in = st_check(x, A, theta, p.budget, mix_seed(p.seed, j * 31 + i), p.band, p.max_budget);
            if (in.value != Tri::Yes) continue;
            ++b.attempted;
            const auto c = st_check(h(x), hA, t1, p.budget, mix_seed(p.seed, j * 37 + i), p.band, p.max_budget);
            if (c.value == Tri::Unknown) {
                ++b.indeterminate;
                continue;
            }
            ++b.decided;
            if (c.value == Tri::Yes) ++b.passed;
            else b.failures.push_back(x);
        }
        out[j] = std::move(b);
    });
    for (auto& b : out) {
        rep.attempted += b.attempted;
        rep.decided += b.decided;
        rep.passed += b.passed;
        rep.indeterminate += b.indeterminate;
        for (auto& f : b.failures) rep.failures.push_back(std::move(f));
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json to_json(const STVerdict& v)
{
    json j;
    j["relation"] = to_string(v.relation);
    if (v.witness_gauges) j["witness_gauges"] = {v.witness_gauges->first.str(), v.witness_gauges->second.str()};
    json ce = json::array();
    for (const auto& c : v.counterexamples) ce.push_back({{"x", point_json(c.x)}, {"ratio", num(c.ratio)}, {"radius", c.radius}});
    j["counterexamples"] = ce;
    j["shells_checked"] = v.shells_checked;
    j["max_ratio"] = num(v.max_ratio);
    j["decided"] = v.decided;
    j["indeterminate"] = v.indeterminate;
    if (!v.failed_direction.empty()) j["failed_direction"] = v.failed_direction;
    j["warnings"] = v.warnings;
    return j;
}

inline json to_json(const GaugeFit& f)
{
    json j;
    j["status"] = to_string(f.status);
    if (f.gauge) j["gauge"] = f.gauge->str();
    j["alpha"] = f.alpha;
    j["C"] = f.C;
    j["slope"] = f.slope;
    j["intercept"] = f.intercept;
    j["resolution"] = f.resolution;
    json sh = json::array();
    for (const auto& s : f.shells)
        sh.push_back({{"radius", s.radius}, {"max_g", s.max_g}, {"samples", s.samples}, {"used", s.used}, {"residual", s.residual}});
    j["shells"] = sh;
    j["warnings"] = f.warnings;
    return j;
}

}  // namespace germlens
