#pragma once

#include "germlens/linalg.hpp"
#include "germlens/maps.hpp"
#include "germlens/polynomial.hpp"

#include <bit>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace germlens {

/// Geometric shell radii r_j = r0 * ratio^j.
struct Schedule {
    double r0 = 0.1;
    double ratio = 0.5;
    int shells = 12;

    std::vector<double> radii() const
    {
        std::vector<double> r;
        for (int j = 0; j < shells; ++j) r.push_back(r0 * std::pow(ratio, j));
        return r;
    }
    double finest() const { return r0 * std::pow(ratio, shells - 1); }
};

enum class GermKind { Semialgebraic, Parametric, Sequence, Cone, Mapped, Custom };

inline const char* to_string(GermKind k)
{
    switch (k) {
    case GermKind::Semialgebraic: return "semialgebraic";
    case GermKind::Parametric: return "parametric";
    case GermKind::Sequence: return "sequence";
    case GermKind::Cone: return "cone";
    case GermKind::Mapped: return "mapped";
    case GermKind::Custom: return "custom";
    }
    return "?";
}

struct BudgetExhausted {};
struct TargetReached {};

/// Counts objective evaluations against a budget and tracks the running minimum.
class Evaluator {
public:
    /// Stops with TargetReached once the running minimum is <= target.
    Evaluator(std::function<double(const Point&)> f, long budget, double target = -1.0)
        : f_(std::move(f)), budget_(budget), target_(target)
    {
    }

    double operator()(const Point& a)
    {
        if (used_ >= budget_) throw BudgetExhausted{};
        ++used_;
        const double v = f_(a);
        if (v < best_) {
            best_ = v;
            arg_ = a;
        }
        if (best_ <= target_) throw TargetReached{};
        return v;
    }
    /// Seeds the running minimum without spending budget (e.g. the origin in the closure).
    void offer(const Point& a, double v)
    {
        if (v < best_) {
            best_ = v;
            arg_ = a;
        }
    }

    double best() const { return best_; }
    const std::optional<Point>& arg() const { return arg_; }
    long used() const { return used_; }
    long budget() const { return budget_; }

private:
    std::function<double(const Point&)> f_;
    long budget_;
    double target_;
    long used_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
    std::optional<Point> arg_;
};

/// Norm window for candidate searches; draws concentrate around `center`.
struct Window {
    double lo = 0.0;
    double hi = 0.0;
    double center = 0.0;
};

/// Local parametrisation of A near a point: u in R^k -> point of A (u = 0 gives the base point).
struct Chart {
    int k = 0;
    double scale = 1.0;
    std::function<std::optional<Point>(const Point&)> at;
};

class GermSet {
public:
    struct Impl {
        std::string name;
        GermKind kind = GermKind::Custom;
        int n = 0;
        std::function<bool(const Point&, double)> member;
        std::function<std::optional<Point>(double, double, Rng&)> draw;
        std::function<std::optional<Point>(const Point&)> foot;   // exact nearest point
        std::function<std::optional<Point>(const Point&)> guess;  // cheap candidate near x
        std::function<std::optional<Chart>(const Point&)> chart;
        std::function<void(Evaluator&, const Window&, std::uint64_t)> minimize;
        std::function<double(const Point&)> lower;                 // certified lower bound on dist
        double resolution = 0.0;
        std::string oracle = "none";  // exact | numerical | none
    };

    GermSet() = default;
    explicit GermSet(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    const std::string& name() const { return impl_->name; }
    GermKind kind() const { return impl_->kind; }
    int dim() const { return impl_->n; }
    double resolution() const { return impl_->resolution; }
    const std::string& oracle_kind() const { return impl_->oracle; }
    bool has_oracle() const { return static_cast<bool>(impl_->foot); }
    const Impl& impl() const { return *impl_; }
    explicit operator bool() const { return static_cast<bool>(impl_); }

    bool contains(const Point& x, double tol = 1e-10) const
    {
        if (x.norm() == 0.0) return true;
        return impl_->member(x, tol);
    }

    std::optional<Point> draw(double lo, double hi, Rng& rng) const { return impl_->draw(lo, hi, rng); }

    /// Up to k points of A with r/2 <= |x| <= r; a pure function of (r, k, seed).
    Cloud sample(double r, int k, std::uint64_t seed) const
    {
        Rng rng = make_rng(seed, std::bit_cast<std::uint64_t>(r));
        Cloud out;
        int misses = 0;
        while (static_cast<int>(out.size()) < k && misses < 40 + 4 * k) {
            auto p = impl_->draw(0.5 * r, r, rng);
            if (p) {
                const double nrm = p->norm();
                if (nrm >= 0.5 * r * (1 - 1e-12) && nrm <= r * (1 + 1e-12)) {
                    out.push_back(std::move(*p));
                    continue;
                }
            }
            ++misses;
            if (out.empty() && misses > 60) break;
        }
        return out;
    }

    std::optional<Point> foot(const Point& x) const
    {
        if (!impl_->foot) return std::nullopt;
        return impl_->foot(x);
    }

    std::optional<double> oracle_distance(const Point& x) const
    {
        if (auto f = foot(x)) return (x - *f).norm();
        return std::nullopt;
    }

    // builders returning modified copies
    GermSet renamed(std::string name) const
    {
        auto c = std::make_shared<Impl>(*impl_);
        c->name = std::move(name);
        return GermSet(c);
    }
    GermSet without_oracle() const
    {
        auto c = std::make_shared<Impl>(*impl_);
        c->foot = nullptr;
        c->oracle = "none";
        return GermSet(c);
    }
    GermSet with_oracle(std::function<std::optional<Point>(const Point&)> foot, std::string label) const
    {
        auto c = std::make_shared<Impl>(*impl_);
        c->foot = std::move(foot);
        c->oracle = std::move(label);
        return GermSet(c);
    }

private:
    std::shared_ptr<const Impl> impl_;
};

namespace detail {

inline std::optional<Point> descend(const Chart& chart, Evaluator& ev, int max_iter)
{
    const int k = chart.k;
    if (k == 0) return std::nullopt;
    auto f = [&](const Point& u) {
        auto p = chart.at(u);
        if (!p) return std::numeric_limits<double>::infinity();
        return ev(*p);
    };
    Point u = Point::Zero(k);
    double fu = f(u);
    double step = 0.25 * chart.scale;
    const double h = 1e-7 * chart.scale;
    for (int it = 0; it < max_iter; ++it) {
        Point grad(k);
        for (int i = 0; i < k; ++i) {
            Point e = Point::Zero(k);
            e[i] = h;
            grad[i] = (f(u + e) - f(u - e)) / (2 * h);
        }
        const double gn = grad.norm();
        if (!std::isfinite(gn) || gn == 0.0) break;
        bool moved = false;
        for (int ls = 0; ls < 30; ++ls) {
            const Point cand = u - (step / gn) * grad;
            const double fc = f(cand);
            if (fc < fu) {
                u = cand;
                fu = fc;
                moved = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!moved || step < 1e-15 * chart.scale) break;
    }
    return chart.at(u);
}

/// Candidate draws followed by chart descent from the incumbent; prefix-stable in the budget.
inline void sampled_minimize(const std::function<std::optional<Point>(double, double, Rng&)>& draw,
                             const std::function<std::optional<Chart>(const Point&)>& chart, Evaluator& ev,
                             const Window& w, std::uint64_t seed)
{
    for (int round = 0; round < 64; ++round) {
        Rng rng = make_rng(seed, 1000 + round);
        for (int i = 0; i < 12; ++i) {
            double lo = w.lo, hi = w.hi;
            if (i % 4 != 3 && w.center > 0.0) {
                lo = std::max(w.lo, w.center / 1.5);
                hi = std::min(w.hi, w.center * 1.5);
            }
            if (auto p = draw(lo, hi, rng)) ev(*p);
        }
        if (chart && ev.arg()) {
            if (auto c = chart(*ev.arg())) descend(*c, ev, 25);
        }
    }
}

inline void install_sampled_minimize(GermSet::Impl& impl)
{
    auto draw = impl.draw;
    auto chart = impl.chart;
    impl.minimize = [draw, chart](Evaluator& ev, const Window& w, std::uint64_t seed) {
        sampled_minimize(draw, chart, ev, w, seed);
    };
}

/// Row-normalised Gauss-Newton onto {f_i = 0} (and |x| = radius when given); min-norm steps.
inline std::optional<Point> newton_project(const std::vector<Polynomial>& eqs, Point x, std::optional<double> radius,
                                           int max_iter = 200)
{
    const int n = static_cast<int>(x.size());
    const int m = static_cast<int>(eqs.size()) + (radius ? 1 : 0);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXd J(m, n);
        Eigen::VectorXd F(m);
        double worst = 0.0;
        const double xn = x.norm();
        if (!(xn > 0.0) || !x.allFinite()) return std::nullopt;
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            const Point g = eqs[i].gradient(x);
            const double gn = g.norm();
            const double fv = eqs[i](x);
            if (gn == 0.0) {
                if (fv == 0.0) {
                    J.row(static_cast<int>(i)).setZero();
                    F[static_cast<int>(i)] = 0.0;
                    continue;
                }
                return std::nullopt;
            }
            J.row(static_cast<int>(i)) = g.transpose() / gn;
            F[static_cast<int>(i)] = fv / gn;
            worst = std::max(worst, std::fabs(fv) / (gn * xn));
        }
        if (radius) {
            J.row(m - 1) = x.transpose() / xn;
            F[m - 1] = xn - *radius;
            worst = std::max(worst, std::fabs(xn - *radius) / *radius);
        }
        if (worst < 1e-14) return x;
        Point dx = -J.completeOrthogonalDecomposition().solve(F);
        const double cap = 0.5 * xn;
        if (dx.norm() > cap) dx *= cap / dx.norm();
        x += dx;
        if (it == max_iter - 1 && worst < 1e-11) return x;
    }
    return std::nullopt;
}

inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& J, int n)
{
    (void)n;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > 1e-12 * std::max(1.0, s[0])) ++rank;
    return svd.matrixV().rightCols(J.cols() - rank);
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Factories

struct SignCondition {
    enum class Op { Ge, Gt, Le, Lt } op = Op::Ge;
    Polynomial p;
};

inline bool sign_ok(const SignCondition& c, const Point& x, double slack)
{
    const double v = c.p(x);
    switch (c.op) {
    case SignCondition::Op::Ge: return v >= -slack;
    case SignCondition::Op::Gt: return v > -slack;
    case SignCondition::Op::Le: return v <= slack;
    case SignCondition::Op::Lt: return v < slack;
    }
    return false;
}

/// {f_i = 0 for all i, sign conditions on g_j}.
inline GermSet semialgebraic(std::string name, int n, std::vector<Polynomial> eqs, std::vector<SignCondition> signs = {})
{
    for (const auto& p : eqs)
        if (p.nvars() != n) throw std::invalid_argument("equation arity does not match ambient dimension");
    for (const auto& c : signs)
        if (c.p.nvars() != n) throw std::invalid_argument("sign condition arity does not match ambient dimension");

    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Semialgebraic;
    impl->n = n;

    auto member = [eqs, signs](const Point& x, double tol) {
        const double xn = x.norm();
        for (const auto& p : eqs) {
            const double g = p.gradient(x).norm();
            if (std::fabs(p(x)) > tol * g * xn + 1e-300) return false;
        }
        for (const auto& c : signs) {
            const double slack = tol * c.p.gradient(x).norm() * xn;
            if (!sign_ok(c, x, slack)) return false;
        }
        return true;
    };
    impl->member = member;

    bool linear = signs.empty() && !eqs.empty();
    for (const auto& p : eqs) linear = linear && p.is_linear_homogeneous();

    if (linear) {
        Eigen::MatrixXd A(static_cast<int>(eqs.size()), n);
        for (std::size_t i = 0; i < eqs.size(); ++i) A.row(static_cast<int>(i)) = eqs[i].gradient(Point::Zero(n)).transpose();
        const Eigen::MatrixXd N = detail::kernel_basis(A, n);
        if (N.cols() == 0) throw std::invalid_argument("germ '" + impl->name + "' is the origin only");
        impl->draw = [N](double lo, double hi, Rng& rng) -> std::optional<Point> {
            Point c(N.cols());
            for (int i = 0; i < c.size(); ++i) c[i] = gaussian(rng);
            if (c.norm() == 0.0) return std::nullopt;
            return uniform(rng, lo, hi) * (N * c).normalized();
        };
        const Eigen::MatrixXd P = N * N.transpose();
        impl->foot = [P](const Point& x) -> std::optional<Point> { return P * x; };
        impl->oracle = "exact";
    } else if (eqs.empty()) {
        impl->draw = [member, n](double lo, double hi, Rng& rng) -> std::optional<Point> {
            for (int t = 0; t < 200; ++t) {
                const Point p = uniform(rng, lo, hi) * random_unit(rng, n);
                if (member(p, 0.0)) return p;
            }
            return std::nullopt;
        };
        impl->foot = [member](const Point& x) -> std::optional<Point> {
            if (member(x, 0.0)) return x;
            return std::nullopt;
        };
    } else {
        impl->draw = [eqs, signs, n](double lo, double hi, Rng& rng) -> std::optional<Point> {
            for (int t = 0; t < 16; ++t) {
                const double rho = uniform(rng, lo, hi);
                auto p = detail::newton_project(eqs, rho * random_unit(rng, n), rho);
                if (!p) continue;
                bool ok = true;
                for (const auto& c : signs) ok = ok && sign_ok(c, *p, 0.0);
                if (ok) return p;
            }
            return std::nullopt;
        };
        impl->chart = [eqs, signs, n](const Point& a) -> std::optional<Chart> {
            Eigen::MatrixXd J(static_cast<int>(eqs.size()), n);
            for (std::size_t i = 0; i < eqs.size(); ++i) J.row(static_cast<int>(i)) = eqs[i].gradient(a).transpose();
            const Eigen::MatrixXd T = detail::kernel_basis(J, n);
            if (T.cols() == 0) return std::nullopt;
            Chart c;
            c.k = static_cast<int>(T.cols());
            c.scale = 0.25 * a.norm();
            c.at = [eqs, signs, T, a](const Point& u) -> std::optional<Point> {
                if (u.norm() == 0.0) return a;
                auto p = detail::newton_project(eqs, a + T * u, std::nullopt, 60);
                if (!p) return std::nullopt;
                for (const auto& cnd : signs)
                    if (!sign_ok(cnd, *p, 0.0)) return std::nullopt;
                return p;
            };
            return c;
        };
    }
    detail::install_sampled_minimize(*impl);
    return GermSet(impl);
}

/// Linear subspace spanned by the columns of `basis`.
inline GermSet subspace(std::string name, const Eigen::MatrixXd& basis)
{
    const int n = static_cast<int>(basis.rows());
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis.transpose(), Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > 1e-12 * std::max(1.0, s[0])) ++rank;
    const Eigen::MatrixXd normals = svd.matrixV().rightCols(n - rank);
    std::vector<Polynomial> eqs;
    for (int j = 0; j < normals.cols(); ++j) {
        std::vector<Term> terms;
        for (int i = 0; i < n; ++i) {
            if (normals(i, j) == 0.0) continue;
            Term t;
            t.coeff = normals(i, j);
            t.exps.assign(n, 0);
            t.exps[i] = 1;
            terms.push_back(t);
        }
        eqs.emplace_back(n, terms);
    }
    if (eqs.empty()) throw std::invalid_argument("use full_space for the whole ambient space");
    return semialgebraic(std::move(name), n, std::move(eqs));
}

/// Curve branches s -> gamma_b(s), s in (0, s_max], with |gamma_b(s)| increasing in s.
inline GermSet parametric(std::string name, int n, std::vector<std::function<Point(double)>> branches, double s_max = 1.0)
{
    if (branches.empty()) throw std::invalid_argument("parametric germ needs at least one branch");
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Parametric;
    impl->n = n;

    // s on branch b with |gamma_b(s)| = rho, by geometric bisection
    auto s_at = [branches, s_max](std::size_t b, double rho) -> std::optional<double> {
        const auto& g = branches[b];
        double hi = s_max;
        if (g(hi).norm() < rho) return std::nullopt;
        double lo = hi;
        int guard = 0;
        while (g(lo).norm() >= rho) {
            lo *= 0.5;
            if (++guard > 2000 || lo == 0.0) return std::nullopt;
        }
        hi = std::min(s_max, 2.0 * lo);
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (mid <= lo || mid >= hi) break;
            (g(mid).norm() < rho ? lo : hi) = mid;
        }
        return hi;
    };

    impl->draw = [branches, s_at](double lo, double hi, Rng& rng) -> std::optional<Point> {
        const std::size_t b = static_cast<std::size_t>(uniform01(rng) * branches.size()) % branches.size();
        const double rho = uniform(rng, lo, hi);
        auto s = s_at(b, rho);
        if (!s) return std::nullopt;
        Point p = branches[b](*s);
        const double pn = p.norm();
        if (pn < lo * (1 - 1e-12) || pn > hi * (1 + 1e-12)) return std::nullopt;
        return p;
    };
    impl->member = [branches, s_at](const Point& x, double tol) {
        const double xn = x.norm();
        for (std::size_t b = 0; b < branches.size(); ++b) {
            auto s = s_at(b, xn);
            if (s && (branches[b](*s) - x).norm() <= std::max(tol, 1e-12) * xn * 2.0) return true;
        }
        return false;
    };
    impl->minimize = [branches, s_at, s_max](Evaluator& ev, const Window& w, std::uint64_t) {
        struct Range {
            double a, b;
        };
        std::vector<Range> ranges;
        for (std::size_t b = 0; b < branches.size(); ++b) {
            auto sl = s_at(b, std::max(w.lo, 1e-300));
            auto sh = s_at(b, w.hi);
            const double a = sl ? *sl : 0.0;
            const double hi = sh ? *sh : s_max;
            if (a <= 0.0 || !(hi > a)) {
                ranges.push_back({hi * 1e-3, hi});
            } else {
                ranges.push_back({a, hi});
            }
        }
        for (int round = 0; round < 5; ++round) {
            const int N = 16 << (2 * round);
            for (std::size_t b = 0; b < branches.size(); ++b) {
                const auto& g = branches[b];
                const double la = std::log(ranges[b].a), lb = std::log(ranges[b].b);
                double best = std::numeric_limits<double>::infinity();
                int arg = 0;
                for (int i = 0; i <= N; ++i) {
                    const double v = ev(g(std::exp(la + (lb - la) * i / N)));
                    if (v < best) {
                        best = v;
                        arg = i;
                    }
                }
                // golden section on the bracket around the best grid point
                double a = la + (lb - la) * std::max(0, arg - 1) / N;
                double c = la + (lb - la) * std::min(N, arg + 1) / N;
                const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
                double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
                double f1 = ev(g(std::exp(x1))), f2 = ev(g(std::exp(x2)));
                for (int it = 0; it < 60 && c - a > 1e-15 * std::fabs(c); ++it) {
                    if (f1 < f2) {
                        c = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = c - phi * (c - a);
                        f1 = ev(g(std::exp(x1)));
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + phi * (c - a);
                        f2 = ev(g(std::exp(x2)));
                    }
                }
            }
        }
    };
    return GermSet(impl);
}

inline constexpr std::int64_t kSequenceMaxIndex = std::int64_t{1} << 60;

/// Points a_m (m >= m0), with |a_m| decreasing to 0.
inline GermSet sequence(std::string name, int n, std::function<Point(std::int64_t)> a, std::int64_t m0 = 1)
{
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Sequence;
    impl->n = n;


    // smallest m >= m0 with |a_m| < rho (or kSequenceMaxIndex)
    auto first_below = [a, m0](double rho) {
        std::int64_t lo = m0, hi = m0;
        if (a(lo).norm() < rho) return lo;
        while (hi < kSequenceMaxIndex && a(hi).norm() >= rho) {
            lo = hi;
            hi = std::min(kSequenceMaxIndex, hi * 2 + 1);
        }
        if (a(hi).norm() >= rho) return kSequenceMaxIndex;
        while (hi - lo > 1) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            (a(mid).norm() >= rho ? lo : hi) = mid;
        }
        return hi;
    };

    impl->draw = [a, first_below](double lo, double hi, Rng& rng) -> std::optional<Point> {
        // indices with lo <= |a_m| <= hi
        const std::int64_t first = first_below(std::nextafter(hi, 2 * hi));
        const std::int64_t last = first_below(lo) - 1;
        if (last < first) return std::nullopt;
        const auto span = static_cast<std::uint64_t>(last - first + 1);
        const std::int64_t m = first + static_cast<std::int64_t>(rng() % span);
        return a(m);
    };
    auto scan = [a, first_below, m0](const Point& x, long cap) -> std::pair<std::optional<Point>, bool> {
        const double xn = x.norm();
        double best = xn;
        std::optional<Point> arg = Point(Point::Zero(x.size()));
        const std::int64_t mid = first_below(xn);
        long used = 0;
        bool up_done = false, down_done = false;
        for (std::int64_t k = 0; !(up_done && down_done); ++k) {
            if (!up_done) {
                const std::int64_t m = mid + k;
                if (m >= kSequenceMaxIndex) {
                    up_done = true;
                } else {
                    const Point p = a(m);
                    if (xn - p.norm() > best) up_done = true;
                    else if (const double d = (p - x).norm(); d < best) {
                        best = d;
                        arg = p;
                    }
                }
            }
            if (!down_done) {
                const std::int64_t m = mid - 1 - k;
                if (m < m0) {
                    down_done = true;
                } else {
                    const Point p = a(m);
                    if (p.norm() - xn > best) down_done = true;
                    else if (const double d = (p - x).norm(); d < best) {
                        best = d;
                        arg = p;
                    }
                }
            }
            if (++used > cap) return {arg, false};
        }
        return {arg, true};
    };
    impl->foot = [scan](const Point& x) -> std::optional<Point> {
        auto [p, complete] = scan(x, 2'000'000);
        if (!complete) return std::nullopt;
        return p;
    };
    impl->oracle = "exact";
    impl->member = [scan](const Point& x, double tol) {
        auto [p, complete] = scan(x, 100'000);
        return p && (*p - x).norm() <= std::max(tol, 1e-12) * x.norm();
    };
    impl->minimize = [a, first_below](Evaluator& ev, const Window& w, std::uint64_t) {
        const std::int64_t first = first_below(std::nextafter(w.hi, 2 * w.hi));
        const std::int64_t last = first_below(w.lo) - 1;
        for (std::int64_t m = first; m <= last; ++m) ev(a(m));
    };
    return GermSet(impl);
}

/// Union of rays through the given unit directions. Membership: angle to some ray <= eta.
inline GermSet cone(std::string name, Cloud dirs, double eta, double resolution = 0.0)
{
    if (dirs.empty()) throw std::invalid_argument("cone needs at least one direction");
    const int n = static_cast<int>(dirs.front().size());
    for (auto& d : dirs) d = normalized(d);
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Cone;
    impl->n = n;
    impl->resolution = resolution;
    const double cos_eta = std::cos(eta);
    auto shared = std::make_shared<const Cloud>(std::move(dirs));
    impl->member = [shared, cos_eta](const Point& x, double) {
        const double xn = x.norm();
        for (const auto& d : *shared)
            if (d.dot(x) >= cos_eta * xn) return true;
        return false;
    };
    impl->draw = [shared](double lo, double hi, Rng& rng) -> std::optional<Point> {
        const auto& d = (*shared)[rng() % shared->size()];
        return uniform(rng, lo, hi) * d;
    };
    impl->foot = [shared](const Point& x) -> std::optional<Point> {
        double best_c = 0.0;
        const Point* arg = nullptr;
        for (const auto& d : *shared) {
            const double c = d.dot(x);
            if (c > best_c) {
                best_c = c;
                arg = &d;
            }
        }
        if (!arg) return Point(Point::Zero(x.size()));
        return Point(best_c * *arg);
    };
    impl->oracle = "exact";
    detail::install_sampled_minimize(*impl);
    return GermSet(impl);
}

/// The half-line through d.
inline GermSet ray(std::string name, const Point& d)
{
    const Point u = normalized(d);
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Custom;
    impl->n = static_cast<int>(u.size());
    impl->member = [u](const Point& x, double tol) {
        const double c = u.dot(x);
        return c > 0.0 && (x - c * u).norm() <= std::max(tol, 1e-15) * x.norm();
    };
    impl->draw = [u](double lo, double hi, Rng& rng) -> std::optional<Point> { return uniform(rng, lo, hi) * u; };
    impl->foot = [u](const Point& x) -> std::optional<Point> { return std::max(0.0, u.dot(x)) * u; };
    impl->oracle = "exact";
    detail::install_sampled_minimize(*impl);
    return GermSet(impl);
}

/// The whole ambient space as a germ.
inline GermSet full_space(int n)
{
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = "R" + std::to_string(n);
    impl->kind = GermKind::Custom;
    impl->n = n;
    impl->member = [](const Point&, double) { return true; };
    impl->draw = [n](double lo, double hi, Rng& rng) -> std::optional<Point> {
        // uniform in the spherical shell lo <= |x| <= hi
        const double a = std::pow(lo, n), b = std::pow(hi, n);
        return std::pow(a + (b - a) * uniform01(rng), 1.0 / n) * random_unit(rng, n);
    };
    impl->foot = [](const Point& x) -> std::optional<Point> { return x; };
    impl->oracle = "exact";
    detail::install_sampled_minimize(*impl);
    return GermSet(impl);
}

/// Fully custom germ from callbacks; minimisation falls back to candidate draws.
inline GermSet custom(std::string name, int n, std::function<bool(const Point&, double)> member,
                      std::function<std::optional<Point>(double, double, Rng&)> draw,
                      std::function<std::optional<Point>(const Point&)> foot = nullptr)
{
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = std::move(name);
    impl->kind = GermKind::Custom;
    impl->n = n;
    impl->member = std::move(member);
    impl->draw = std::move(draw);
    if (foot) {
        impl->foot = std::move(foot);
        impl->oracle = "exact";
    }
    detail::install_sampled_minimize(*impl);
    return GermSet(impl);
}

/// h(A). Needs K constants or an inverse to locate the base radius window.
inline GermSet mapped(const GermSet& base, const LipschitzMap& h, std::string name = "")
{
    if (h.dim != base.dim()) throw std::invalid_argument("map dimension does not match germ dimension");
    auto impl = std::make_shared<GermSet::Impl>();
    impl->name = name.empty() ? h.name + "(" + base.name() + ")" : std::move(name);
    impl->kind = GermKind::Mapped;
    impl->n = base.dim();

    // base norms whose images may land in [lo, hi]
    auto base_window = [base, h](double lo, double hi, Rng& rng) -> std::pair<double, double> {
        if (h.bi_lipschitz()) return {lo / *h.K2, hi / *h.K1};
        double blo = std::numeric_limits<double>::infinity(), bhi = 0.0;
        for (int j = -120; j <= 120; ++j) {
            const double s = hi * std::pow(2.0, 0.5 * j);
            for (int t = 0; t < 2; ++t) {
                auto a = base.draw(0.5 * s, s, rng);
                if (!a) continue;
                const double in = h(*a).norm();
                if (in >= lo && in <= hi) {
                    blo = std::min(blo, 0.5 * a->norm());
                    bhi = std::max(bhi, 2.0 * a->norm());
                }
            }
        }
        if (bhi == 0.0) return {0.0, 0.0};
        blo = std::max(blo, 0.0);
        return {blo, bhi};
    };

    impl->draw = [base, h, base_window](double lo, double hi, Rng& rng) -> std::optional<Point> {
        const auto [blo, bhi] = base_window(lo, hi, rng);
        if (!(bhi > 0.0)) return std::nullopt;
        for (int t = 0; t < 400; ++t) {
            auto a = base.draw(blo, bhi, rng);
            if (!a) continue;
            Point y = h(*a);
            const double yn = y.norm();
            if (yn >= lo && yn <= hi) return y;
        }
        return std::nullopt;
    };

    if (h.has_inverse()) {
        impl->member = [base, h](const Point& y, double tol) { return base.contains(h.inverse(y), tol); };
        impl->guess = [base, h](const Point& y) -> std::optional<Point> {
            const Point x = h.inverse(y);
            if (auto f = base.foot(x)) return h(*f);
            if (base.impl().guess)
                if (auto g = base.impl().guess(x)) return h(*g);
            return std::nullopt;
        };
        if (h.bi_lipschitz() && h.provenance == "analytic" && base.has_oracle()) {
            impl->lower = [base, h](const Point& y) { return *h.K1 * *base.oracle_distance(h.inverse(y)); };
        }
    } else {
        impl->member = [base, h](const Point& y, double tol) {
            Evaluator ev([&](const Point& a) { return (h(a) - y).norm(); }, 4000);
            const double yn = y.norm();
            try {
                base.impl().minimize(ev, Window{0.0, 4.0 * yn, yn}, 7);
            } catch (const BudgetExhausted&) {
            }
            return ev.best() <= std::max(tol, 1e-9) * yn;
        };
    }

    impl->minimize = [base, h, base_window](Evaluator& ev, const Window& w, std::uint64_t seed) {
        Rng rng = make_rng(seed, 0xB45E);
        const auto [blo, bhi] = base_window(w.lo, w.hi, rng);
        if (!(bhi > 0.0)) return;
        const double bc = h.bi_lipschitz() ? w.center / std::sqrt(*h.K1 * *h.K2) : std::sqrt(std::max(blo, 1e-300) * bhi);
        Evaluator inner([&](const Point& a) { return ev(h(a)); }, ev.budget() - ev.used());
        base.impl().minimize(inner, Window{blo, bhi, bc}, seed);
    };
    return GermSet(impl);
}

// ---------------------------------------------------------------------------------------------
// Distance estimation

struct DistanceInterval {
    double lower = 0.0;
    double upper = 0.0;
    long evaluations = 0;
    bool exhausted = false;
    bool exact = false;
    std::optional<Point> witness;  // point of A (or its closure) attaining `upper`
};

constexpr long kMinDistanceBudget = 16;
constexpr long kDefaultDistanceBudget = 4000;

/// Interval containing dist(x, A). Anytime: more budget never widens the interval (same seed).
/// A nonnegative `stop_at` ends the search as soon as the upper bound reaches it.
inline DistanceInterval distance_estimate(const Point& x, const GermSet& A, long budget = kDefaultDistanceBudget,
                                          std::uint64_t seed = 0, double stop_at = -1.0)
{
    if (budget < kMinDistanceBudget)
        throw std::invalid_argument("distance budget must be at least " + std::to_string(kMinDistanceBudget));
    DistanceInterval out;
    const double xn = x.norm();
    if (xn == 0.0) {
        out.exact = true;
        out.witness = x;
        return out;
    }
    if (auto f = A.foot(x)) {
        out.lower = out.upper = (x - *f).norm();
        out.exact = true;
        out.witness = *f;
        out.evaluations = 1;
        return out;
    }
    Evaluator ev([&](const Point& a) { return (x - a).norm(); }, budget, stop_at);
    ev.offer(Point::Zero(x.size()), xn);
    try {
        if (xn <= stop_at) throw TargetReached{};
        if (A.impl().guess)
            if (auto g = A.impl().guess(x)) ev(*g);
        A.impl().minimize(ev, Window{0.05 * xn, 2.0 * xn, xn}, mix_seed(seed, 0xD15));
    } catch (const BudgetExhausted&) {
        out.exhausted = true;
    } catch (const TargetReached&) {
    }
    out.upper = ev.best();
    out.witness = ev.arg();
    out.evaluations = ev.used();
    if (A.impl().lower) out.lower = std::min(out.upper, A.impl().lower(x));
    return out;
}

}  // namespace germlens
