#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace germlens {

/// Odd, strictly increasing, continuous germ theta with theta(0) = 0.
class Gauge {
public:
    struct Monomial {
        double C = 1.0;
        double alpha = 1.0;
    };
    struct Tabulated {
        std::vector<double> t;  // strictly increasing, t[0] > 0
        std::vector<double> v;  // strictly increasing, v[0] > 0
    };
    struct Scaled {  // a * inner(t / b)
        double a = 1.0;
        double b = 1.0;
        std::shared_ptr<const Gauge> inner;
    };

    Gauge() : form_(Monomial{}), t_max_(1.0) {}

    static Gauge monomial(double C, double alpha, double t_max = 1.0)
    {
        if (!(C > 0.0) || !(alpha > 0.0)) throw std::invalid_argument("monomial gauge needs C > 0 and alpha > 0");
        if (!(t_max > 0.0)) throw std::invalid_argument("gauge domain must be positive");
        Gauge g;
        g.form_ = Monomial{C, alpha};
        g.t_max_ = t_max;
        return g;
    }

    static Gauge tabulated(std::vector<double> t, std::vector<double> v)
    {
        if (t.size() != v.size() || t.empty()) throw std::invalid_argument("tabulated gauge needs matching nonempty tables");
        for (std::size_t i = 0; i < t.size(); ++i) {
            const bool ok_t = i == 0 ? t[i] > 0.0 : t[i] > t[i - 1];
            const bool ok_v = i == 0 ? v[i] > 0.0 : v[i] > v[i - 1];
            if (!ok_t || !ok_v) throw std::invalid_argument("tabulated gauge table must be strictly increasing and positive");
        }
        Gauge g;
        g.t_max_ = t.back();
        g.form_ = Tabulated{std::move(t), std::move(v)};
        return g;
    }

    /// a * theta(t / b); stays monomial when theta is.
    static Gauge scaled(const Gauge& inner, double a, double b)
    {
        if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("gauge scaling factors must be positive");
        if (const auto* m = std::get_if<Monomial>(&inner.form_))
            return monomial(a * m->C / std::pow(b, m->alpha), m->alpha, inner.t_max_ * b);
        Gauge g;
        g.form_ = Scaled{a, b, std::make_shared<const Gauge>(inner)};
        g.t_max_ = inner.t_max_ * b;
        return g;
    }

    double t_max() const { return t_max_; }
    bool is_monomial() const { return std::holds_alternative<Monomial>(form_); }
    std::optional<Monomial> as_monomial() const
    {
        if (const auto* m = std::get_if<Monomial>(&form_)) return *m;
        return std::nullopt;
    }
    Gauge with_domain(double t_max) const
    {
        Gauge g = *this;
        g.t_max_ = t_max;
        return g;
    }

    double operator()(double t) const
    {
        if (std::fabs(t) > t_max_ * (1.0 + 1e-12))
            throw std::domain_error("gauge evaluated at |t| = " + std::to_string(std::fabs(t)) + " beyond t_max = " +
                                    std::to_string(t_max_));
        if (t < 0.0) return -positive(-t);
        return positive(t);
    }

    std::string str() const
    {
        std::ostringstream os;
        os.precision(10);
        if (const auto* m = std::get_if<Monomial>(&form_)) {
            os << m->C << "*t^" << m->alpha;
        } else if (const auto* tb = std::get_if<Tabulated>(&form_)) {
            os << "table[" << tb->t.size() << "]";
        } else {
            const auto& s = std::get<Scaled>(form_);
            os << s.a << "*(" << s.inner->str() << ")(t/" << s.b << ")";
        }
        return os.str();
    }

private:
    double positive(double t) const
    {
        if (t == 0.0) return 0.0;
        if (const auto* m = std::get_if<Monomial>(&form_)) return m->C * std::pow(t, m->alpha);
        if (const auto* tb = std::get_if<Tabulated>(&form_)) {
            const auto it = std::upper_bound(tb->t.begin(), tb->t.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - tb->t.begin());
            if (i == 0) return tb->v[0] * t / tb->t[0];
            if (i == tb->t.size()) return tb->v.back();
            const double w = (t - tb->t[i - 1]) / (tb->t[i] - tb->t[i - 1]);
            return tb->v[i - 1] + w * (tb->v[i] - tb->v[i - 1]);
        }
        const auto& s = std::get<Scaled>(form_);
        return s.a * (*s.inner)(t / s.b);
    }

    std::variant<Monomial, Tabulated, Scaled> form_;
    double t_max_;
};

enum class GaugeOrder { LessEq, GreaterEq, Incomparable };

inline const char* to_string(GaugeOrder o)
{
    switch (o) {
    case GaugeOrder::LessEq: return "<=";
    case GaugeOrder::GreaterEq: return ">=";
    case GaugeOrder::Incomparable: return "incomparable";
    }
    return "?";
}

struct GaugeComparison {
    GaugeOrder order = GaugeOrder::Incomparable;
    std::optional<double> witness;  // t where the ordering flips, when incomparable
};

/// Log-spaced grid of n points in [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> g;
    if (n == 1) return {hi};
    for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
    return g;
}

/// Pointwise comparison on a grid; ties count for both directions, LessEq wins when equal everywhere.
inline GaugeComparison gauge_compare(const Gauge& a, const Gauge& b, const std::vector<double>& grid)
{
    bool le = true, ge = true;
    std::optional<double> le_break, ge_break;
    for (double t : grid) {
        const double x = a(t), y = b(t);
        if (x > y && le) {
            le = false;
            le_break = t;
        }
        if (x < y && ge) {
            ge = false;
            ge_break = t;
        }
    }
    if (le) return {GaugeOrder::LessEq, std::nullopt};
    if (ge) return {GaugeOrder::GreaterEq, std::nullopt};
    return {GaugeOrder::Incomparable, le_break};
}

inline GaugeComparison gauge_compare(const Gauge& a, const Gauge& b)
{
    const double hi = std::min(a.t_max(), b.t_max());
    return gauge_compare(a, b, log_grid(hi * 1e-6, hi, 400));
}

/// Strict monotonicity on a grid; returns the first offending t if any.
inline std::optional<double> gauge_monotonicity_violation(const Gauge& g, const std::vector<double>& grid)
{
    double prev = 0.0;
    for (double t : grid) {
        const double v = g(t);
        if (!(v > prev)) return t;
        prev = v;
    }
    return std::nullopt;
}

}  // namespace germlens
