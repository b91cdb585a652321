#pragma once

#include "germlens/germ.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/maps.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace germlens {

// ---------------------------------------------------------------------------------------------
// Constant estimation

struct ScaleQuotients {
    double separation = 0.0;
    double min_q = std::numeric_limits<double>::infinity();
    double max_q = 0.0;
};

struct ConstantsEstimate {
    double K1 = std::numeric_limits<double>::infinity();
    double K2 = 0.0;
    bool forward_unbounded = false;  // quotients grow as pairs shrink: not Lipschitz
    bool inverse_unbounded = false;  // quotients collapse as pairs shrink: inverse not Lipschitz
    std::vector<ScaleQuotients> scales;
    std::size_t pairs = 0;
};

/// Difference quotients on the ball of radius `region`, at separations region * 10^-k down to 1e-6.
/// Each scale mixes pairs anywhere in the region with pairs localized near the origin,
/// in random and in coordinate directions.
inline ConstantsEstimate constants_estimate(const LipschitzMap& h, double region, int pair_count, std::uint64_t seed)
{
    ConstantsEstimate out;
    const int n = h.dim;
    std::vector<double> seps;
    for (double s = region; s >= 1e-6 * (1 - 1e-9); s *= 0.1) seps.push_back(s);
    const int per = std::max(8, pair_count / static_cast<int>(seps.size()));
    for (std::size_t k = 0; k < seps.size(); ++k) {
        Rng rng = make_rng(seed, 0xC0 + k);
        ScaleQuotients sq;
        sq.separation = seps[k];
        for (int i = 0; i < per; ++i) {
            // alternate: anywhere/local base point, random/coordinate direction
            const bool local = i % 2 == 1;
            const bool axis = (i / 2) % 2 == 1;
            const Point x = random_in_ball(rng, n, local ? seps[k] : region);
            Point u = random_unit(rng, n);
            if (axis) u = Point::Unit(n, (i / 4) % n);
            const Point y = x + seps[k] * uniform(rng, 0.1, 1.0) * u;
            const double d = (x - y).norm();
            if (d == 0.0) continue;
            const double q = (h(x) - h(y)).norm() / d;
            sq.min_q = std::min(sq.min_q, q);
            sq.max_q = std::max(sq.max_q, q);
            ++out.pairs;
        }
        out.K1 = std::min(out.K1, sq.min_q);
        out.K2 = std::max(out.K2, sq.max_q);
        out.scales.push_back(sq);
    }
    // the trend across the finest half of the scales decides boundedness
    const auto& a = out.scales[out.scales.size() / 2];
    const auto& b = out.scales.back();
    out.forward_unbounded = b.max_q > 4.0 * a.max_q;
    out.inverse_unbounded = b.min_q < 0.25 * a.min_q;
    return out;
}

inline json to_json(const ConstantsEstimate& c)
{
    json s = json::array();
    for (const auto& q : c.scales) s.push_back({{"separation", q.separation}, {"min", num(q.min_q)}, {"max", num(q.max_q)}});
    return {{"K1", num(c.K1)},
            {"K2", num(c.K2)},
            {"forward_unbounded", c.forward_unbounded},
            {"inverse_unbounded", c.inverse_unbounded},
            {"pairs", c.pairs},
            {"scales", s}};
}

// ---------------------------------------------------------------------------------------------
// Banach / McShane extension

struct LipschitzViolation : std::runtime_error {
    Point a, b;
    double quotient;
    LipschitzViolation(Point a_, Point b_, double q)
        : std::runtime_error("function is not L-Lipschitz on the anchor set (quotient " + std::to_string(q) + ")"),
          a(std::move(a_)), b(std::move(b_)), quotient(q)
    {
    }
};

enum class ExtensionMode { Inf, Sup, Convex };

/// alpha(x) = min_a f(a) + L|x - a|, beta(x) = max_a f(a) - L|x - a| over finitely many anchors.
class BanachExtension {
public:
    BanachExtension(Cloud anchors, std::vector<double> values, double L, double tol = 1e-12)
        : a_(std::move(anchors)), f_(std::move(values)), L_(L)
    {
        if (a_.empty() || a_.size() != f_.size()) throw std::invalid_argument("extension needs matching anchors and values");
        if (!(L >= 0.0)) throw std::invalid_argument("Lipschitz constant must be nonnegative");
        for (std::size_t i = 0; i < a_.size(); ++i)
            for (std::size_t j = i + 1; j < a_.size(); ++j) {
                const double d = (a_[i] - a_[j]).norm();
                const double df = std::fabs(f_[i] - f_[j]);
                if (df > L * d * (1 + tol) + tol) throw LipschitzViolation(a_[i], a_[j], d > 0 ? df / d : INFINITY);
            }
    }

    double alpha(const Point& x) const
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a_.size(); ++i) best = std::min(best, f_[i] + L_ * (x - a_[i]).norm());
        return best;
    }
    double beta(const Point& x) const
    {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a_.size(); ++i) best = std::max(best, f_[i] - L_ * (x - a_[i]).norm());
        return best;
    }
    double convex(const Point& x, double t) const { return t * alpha(x) + (1.0 - t) * beta(x); }
    double operator()(const Point& x, ExtensionMode m = ExtensionMode::Inf, double t = 0.5) const
    {
        switch (m) {
        case ExtensionMode::Inf: return alpha(x);
        case ExtensionMode::Sup: return beta(x);
        case ExtensionMode::Convex: return convex(x, t);
        }
        return alpha(x);
    }

    const Cloud& anchors() const { return a_; }
    const std::vector<double>& values() const { return f_; }
    double L() const { return L_; }

private:
    Cloud a_;
    std::vector<double> f_;
    double L_;
};

/// Extension from a germ: anchors are shell samples of A, values f on them.
inline BanachExtension banach_extension(const GermSet& A, const std::function<double(const Point&)>& f, double L,
                                        const Schedule& s, int per_shell, std::uint64_t seed)
{
    Cloud anchors{Point::Zero(A.dim())};
    const auto radii = s.radii();
    for (std::size_t j = 0; j < radii.size(); ++j)
        for (auto& p : A.sample(radii[j], per_shell, mix_seed(seed, j))) anchors.push_back(std::move(p));
    std::vector<double> v;
    v.reserve(anchors.size());
    for (const auto& p : anchors) v.push_back(f(p));
    return BanachExtension(std::move(anchors), std::move(v), L);
}

// ---------------------------------------------------------------------------------------------
// Cone extension h*(t x, t) = (t h(x), t)

struct ConeBase {
    LipschitzMap h;  // acts on the base X1 (at height 1), need not fix 0
    double c = 1.0;  // |x - x'| / c <= |h x - h x'| <= c |x - x'| on X1
    double R = 0.0;  // sup |x| over X1
    double H = 0.0;  // sup |h(x)| over X1
    Cloud samples;   // points of X1 used for validation
};

/// Checks the claimed constant c of the base map on all sample pairs.
inline void validate_cone_base(const ConeBase& b, double tol = 1e-9)
{
    for (std::size_t i = 0; i < b.samples.size(); ++i)
        for (std::size_t j = i + 1; j < b.samples.size(); ++j) {
            const double d = (b.samples[i] - b.samples[j]).norm();
            if (d == 0.0) continue;
            const double q = (b.h(b.samples[i]) - b.h(b.samples[j])).norm() / d;
            if (q > b.c * (1 + tol) || q < (1 - tol) / b.c) throw LipschitzViolation(b.samples[i], b.samples[j], q);
        }
}

/// c' from |h*(p) - h*(p')| <= (1 + H + cR)|t - t'| + c |tx - t'x'|.
inline double cone_constant(double c, double R, double H) { return std::hypot(1.0 + H + c * R, c); }

/// Map on R^{n+1}: (y, t) -> (t h(y/t), t), 0 -> 0; the inverse is built from h^{-1} the same way.
inline LipschitzMap cone_extension(const ConeBase& b)
{
    validate_cone_base(b);
    const int n = b.h.dim;
    auto lift = [n](PointMap g) {
        return [g, n](const Point& p) -> Point {
            const double t = p[n];
            if (t == 0.0) return Point::Zero(n + 1);
            Point out(n + 1);
            out.head(n) = t * g(p.head(n) / t);
            out[n] = t;
            return out;
        };
    };
    LipschitzMap m;
    m.name = "cone(" + b.h.name + ")";
    m.dim = n + 1;
    m.forward = lift(b.h.forward);
    if (b.h.has_inverse()) m.inverse = lift(b.h.inverse);
    m.K2 = cone_constant(b.c, b.R, b.H);
    m.K1 = 1.0 / cone_constant(b.c, b.H, b.R);
    m.provenance = "analytic";
    return m;
}

// ---------------------------------------------------------------------------------------------
// Finite simplicial complexes and the vertexwise-linear extension

using Simplex = std::vector<int>;  // sorted vertex indices

struct SimplicialComplex {
    Cloud vertices;
    std::vector<Simplex> maximal;

    /// Every face of every maximal simplex.
    std::set<Simplex> faces() const
    {
        std::set<Simplex> out;
        for (const auto& s : maximal) {
            const int k = static_cast<int>(s.size());
            for (int mask = 1; mask < (1 << k); ++mask) {
                Simplex f;
                for (int i = 0; i < k; ++i)
                    if (mask & (1 << i)) f.push_back(s[static_cast<std::size_t>(i)]);
                out.insert(f);
            }
        }
        return out;
    }
};

/// L (a set of faces of K, closed under faces) is full iff every face of K spanned by vertices of L is in L.
inline bool is_full_subcomplex(const SimplicialComplex& K, const std::set<Simplex>& L)
{
    std::set<int> verts;
    for (const auto& s : L)
        for (int v : s) verts.insert(v);
    for (const auto& f : K.faces()) {
        const bool spanned = std::all_of(f.begin(), f.end(), [&](int v) { return verts.count(v) > 0; });
        if (spanned && !L.count(f)) return false;
    }
    return true;
}

struct Subdivision {
    SimplicialComplex complex;
    std::map<Simplex, int> barycenter;  // face of the old complex -> new vertex
};

/// Barycentric subdivision: new simplices are chains f0 < f1 < ... of faces.
inline Subdivision barycentric_subdivision(const SimplicialComplex& K)
{
    Subdivision sd;
    for (const auto& f : K.faces()) {
        Point c = Point::Zero(K.vertices.front().size());
        for (int v : f) c += K.vertices[static_cast<std::size_t>(v)];
        sd.barycenter[f] = static_cast<int>(sd.complex.vertices.size());
        sd.complex.vertices.push_back(c / static_cast<double>(f.size()));
    }
    for (const auto& s : K.maximal) {
        // maximal chains correspond to orderings of the vertices of s
        Simplex order = s;
        std::sort(order.begin(), order.end());
        do {
            Simplex chain, prefix;
            for (int v : order) {
                prefix.push_back(v);
                Simplex f = prefix;
                std::sort(f.begin(), f.end());
                chain.push_back(sd.barycenter.at(f));
            }
            std::sort(chain.begin(), chain.end());
            sd.complex.maximal.push_back(chain);
        } while (std::next_permutation(order.begin(), order.end()));
    }
    return sd;
}

/// Image of a subcomplex under subdivision: chains of its own faces.
inline std::set<Simplex> subdivide_subcomplex(const Subdivision& sd, const std::set<Simplex>& L)
{
    std::set<Simplex> out;
    std::vector<Simplex> faces(L.begin(), L.end());
    std::function<void(Simplex&, const Simplex&)> grow = [&](Simplex& chain, const Simplex& last) {
        Simplex s = chain;
        std::sort(s.begin(), s.end());
        out.insert(s);
        for (const auto& f : faces) {
            if (f.size() <= last.size() || !std::includes(f.begin(), f.end(), last.begin(), last.end())) continue;
            chain.push_back(sd.barycenter.at(f));
            grow(chain, f);
            chain.pop_back();
        }
    };
    for (const auto& f : faces) {
        Simplex chain{sd.barycenter.at(f)};
        grow(chain, f);
    }
    return out;
}

/// Barycentric coordinates of p in simplex s, if p lies in it (within tol).
inline std::optional<std::vector<double>> barycentric(const SimplicialComplex& K, const Simplex& s, const Point& p,
                                                      double tol = 1e-10)
{
    const Point& v0 = K.vertices[static_cast<std::size_t>(s[0])];
    const int k = static_cast<int>(s.size()) - 1;
    std::vector<double> t(s.size(), 0.0);
    if (k == 0) {
        if ((p - v0).norm() > tol) return std::nullopt;
        t[0] = 1.0;
        return t;
    }
    Eigen::MatrixXd M(v0.size(), k);
    for (int i = 0; i < k; ++i) M.col(i) = K.vertices[static_cast<std::size_t>(s[static_cast<std::size_t>(i + 1)])] - v0;
    const Eigen::VectorXd lam = M.colPivHouseholderQr().solve(p - v0);
    if ((M * lam - (p - v0)).norm() > tol * std::max(1.0, p.norm())) return std::nullopt;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        if (lam[i] < -tol) return std::nullopt;
        t[static_cast<std::size_t>(i + 1)] = lam[i];
        sum += lam[i];
    }
    if (sum > 1.0 + tol) return std::nullopt;
    t[0] = 1.0 - sum;
    return t;
}

/// sum t_i v_i -> sum t_i image(v_i) on the carrier of K.
inline std::function<std::optional<Point>(const Point&)> simplicial_extension(const SimplicialComplex& K,
                                                                              const Cloud& images)
{
    if (images.size() != K.vertices.size()) throw std::invalid_argument("one image per vertex required");
    return [K, images](const Point& p) -> std::optional<Point> {
        for (const auto& s : K.maximal)
            if (auto t = barycentric(K, s, p)) {
                Point out = Point::Zero(images.front().size());
                for (std::size_t i = 0; i < s.size(); ++i) out += (*t)[i] * images[static_cast<std::size_t>(s[i])];
                return out;
            }
        return std::nullopt;
    };
}

}  // namespace germlens
