#pragma once

#include "germlens/jsonio.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace germlens {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline const Rational kDefaultTruncOrder{8};

struct PxTerm {
    Rational exponent;
    Rational coefficient;
    bool operator==(const PxTerm&) const = default;
};

namespace detail {

// nullopt stands for +infinity
using Order = std::optional<Rational>;

inline Order order_min(const Order& a, const Order& b)
{
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

inline Order order_plus(const Order& a, const Order& b)
{
    if (!a || !b) return std::nullopt;
    return *a + *b;
}

}  // namespace detail

/// Truncated Puiseux series sum c_i t^{e_i} over the rationals; t is a positive infinitesimal.
/// Terms at exponents >= trunc_order are dropped. `reliable` is the exponent below which every
/// term is exact (nullopt when nothing was ever dropped).
class PuiseuxNumber {
public:
    PuiseuxNumber() = default;
    PuiseuxNumber(const Rational& c, Rational trunc = kDefaultTruncOrder) : trunc_(std::move(trunc))
    {
        if (c != 0) terms_.push_back({Rational(0), c});
        normalize();
    }
    PuiseuxNumber(int c) : PuiseuxNumber(Rational(c)) {}

    static PuiseuxNumber monomial(const Rational& c, const Rational& e, Rational trunc = kDefaultTruncOrder)
    {
        return from_terms({{e, c}}, std::move(trunc));
    }
    /// The generator t.
    static PuiseuxNumber eps(Rational trunc = kDefaultTruncOrder) { return monomial(1, 1, std::move(trunc)); }

    static PuiseuxNumber from_terms(std::vector<PxTerm> terms, Rational trunc = kDefaultTruncOrder,
                                    detail::Order reliable = std::nullopt)
    {
        PuiseuxNumber x;
        x.terms_ = std::move(terms);
        x.trunc_ = std::move(trunc);
        x.reliable_ = std::move(reliable);
        x.normalize();
        return x;
    }

    const std::vector<PxTerm>& terms() const { return terms_; }
    const Rational& trunc_order() const { return trunc_; }
    const detail::Order& reliable() const { return reliable_; }
    bool exact() const { return !reliable_; }
    bool truncation_loss() const { return reliable_ && *reliable_ < trunc_; }
    bool empty() const { return terms_.empty(); }
    bool is_zero() const { return terms_.empty() && !reliable_; }

    /// Sign of the leading coefficient; 0 when no term survives.
    int sign() const { return terms_.empty() ? 0 : (terms_.front().coefficient > 0 ? 1 : -1); }

    const Rational& valuation() const
    {
        if (terms_.empty()) throw std::domain_error("valuation of zero");
        return terms_.front().exponent;
    }

    /// Common denominator p of the exponents.
    Integer denominator() const
    {
        Integer p = 1;
        for (const auto& t : terms_) p = boost::multiprecision::lcm(p, boost::multiprecision::denominator(t.exponent));
        return p;
    }

    bool is_rational() const { return exact() && (terms_.empty() || (terms_.size() == 1 && terms_[0].exponent == 0)); }
    Rational rational_value() const
    {
        if (!is_rational()) throw std::domain_error("not a rational constant");
        return terms_.empty() ? Rational(0) : terms_[0].coefficient;
    }

    PuiseuxNumber with_trunc(Rational T) const
    {
        PuiseuxNumber x = *this;
        x.trunc_ = std::move(T);
        x.normalize();
        return x;
    }

    bool operator==(const PuiseuxNumber& o) const { return terms_ == o.terms_ && reliable_ == o.reliable_; }

private:
    void normalize()
    {
        std::map<Rational, Rational> acc;
        for (const auto& t : terms_) acc[t.exponent] += t.coefficient;
        terms_.clear();
        for (const auto& [e, c] : acc) {
            if (c == 0) continue;
            if (reliable_ && e >= *reliable_) continue;
            if (e >= trunc_) {
                reliable_ = detail::order_min(reliable_, trunc_);
                continue;
            }
            terms_.push_back({e, c});
        }
    }

    std::vector<PxTerm> terms_;
    Rational trunc_ = kDefaultTruncOrder;
    detail::Order reliable_;
};

// ---------------------------------------------------------------------------------------------
// Field operations

inline PuiseuxNumber px_neg(const PuiseuxNumber& x)
{
    auto t = x.terms();
    for (auto& s : t) s.coefficient = -s.coefficient;
    return PuiseuxNumber::from_terms(std::move(t), x.trunc_order(), x.reliable());
}

inline PuiseuxNumber px_add(const PuiseuxNumber& x, const PuiseuxNumber& y)
{
    auto t = x.terms();
    t.insert(t.end(), y.terms().begin(), y.terms().end());
    return PuiseuxNumber::from_terms(std::move(t), std::min(x.trunc_order(), y.trunc_order()),
                                     detail::order_min(x.reliable(), y.reliable()));
}

inline PuiseuxNumber px_mul(const PuiseuxNumber& x, const PuiseuxNumber& y)
{
    std::vector<PxTerm> t;
    for (const auto& a : x.terms())
        for (const auto& b : y.terms()) t.push_back({a.exponent + b.exponent, a.coefficient * b.coefficient});
    const detail::Order vx = x.empty() ? detail::Order{} : x.valuation();
    const detail::Order vy = y.empty() ? detail::Order{} : y.valuation();
    using detail::order_min, detail::order_plus;
    const auto rel = order_min(order_min(order_plus(x.reliable(), vy), order_plus(y.reliable(), vx)),
                               order_plus(x.reliable(), y.reliable()));
    return PuiseuxNumber::from_terms(std::move(t), std::min(x.trunc_order(), y.trunc_order()), rel);
}

inline PuiseuxNumber px_sub(const PuiseuxNumber& x, const PuiseuxNumber& y) { return px_add(x, px_neg(y)); }

/// 1/x = c^{-1} t^{-v} sum_k (-u)^k for x = c t^v (1 + u).
inline PuiseuxNumber px_inv(const PuiseuxNumber& x)
{
    if (x.empty()) throw std::domain_error("division by zero");
    const Rational T = x.trunc_order();
    const Rational v = x.valuation();
    const Rational c = x.terms().front().coefficient;
    std::vector<PxTerm> ut;
    for (std::size_t i = 1; i < x.terms().size(); ++i)
        ut.push_back({x.terms()[i].exponent - v, x.terms()[i].coefficient / c});
    // the series is needed up to exponent T + v before the shift by -v
    const Rational inner = T + v;
    const PuiseuxNumber mu = px_neg(PuiseuxNumber::from_terms(std::move(ut), inner));
    PuiseuxNumber sum = PuiseuxNumber(Rational(1), inner);
    PuiseuxNumber power = sum;
    while (!mu.empty()) {
        power = px_mul(power, mu);
        sum = px_add(sum, power);
        if (power.empty()) break;
    }
    std::vector<PxTerm> out;
    for (const auto& s : sum.terms()) out.push_back({s.exponent - v, s.coefficient / c});
    detail::Order rel = detail::order_plus(sum.reliable(), -v);
    // an uncertain input of order r perturbs 1/x at order r - 2v
    rel = detail::order_min(rel, detail::order_plus(x.reliable(), -2 * v));
    return PuiseuxNumber::from_terms(std::move(out), T, rel);
}

inline PuiseuxNumber px_div(const PuiseuxNumber& x, const PuiseuxNumber& y) { return px_mul(x, px_inv(y)); }

inline PuiseuxNumber operator+(const PuiseuxNumber& a, const PuiseuxNumber& b) { return px_add(a, b); }
inline PuiseuxNumber operator-(const PuiseuxNumber& a, const PuiseuxNumber& b) { return px_sub(a, b); }
inline PuiseuxNumber operator*(const PuiseuxNumber& a, const PuiseuxNumber& b) { return px_mul(a, b); }
inline PuiseuxNumber operator/(const PuiseuxNumber& a, const PuiseuxNumber& b) { return px_div(a, b); }
inline PuiseuxNumber operator-(const PuiseuxNumber& a) { return px_neg(a); }

inline PuiseuxNumber px_pow(const PuiseuxNumber& x, unsigned k)
{
    PuiseuxNumber r(Rational(1), x.trunc_order());
    for (unsigned i = 0; i < k; ++i) r = px_mul(r, x);
    return r;
}

// ---------------------------------------------------------------------------------------------
// Order and norm

enum class PxOrder { Less, Equal, Greater, Indeterminate };

inline std::string to_string(PxOrder o)
{
    switch (o) {
        case PxOrder::Less: return "<";
        case PxOrder::Equal: return "=";
        case PxOrder::Greater: return ">";
        case PxOrder::Indeterminate: return "indeterminate";
    }
    return "?";
}

/// Sign of the lowest surviving term of x - y; Indeterminate when x and y agree on every reliable term.
inline PxOrder px_compare(const PuiseuxNumber& x, const PuiseuxNumber& y)
{
    const PuiseuxNumber d = px_sub(x, y);
    if (d.empty()) return d.exact() ? PxOrder::Equal : PxOrder::Indeterminate;
    return d.sign() > 0 ? PxOrder::Greater : PxOrder::Less;
}

inline bool px_less(const PuiseuxNumber& x, const PuiseuxNumber& y)
{
    const auto o = px_compare(x, y);
    if (o == PxOrder::Indeterminate) throw std::domain_error("comparison indeterminate at truncation order");
    return o == PxOrder::Less;
}

inline PuiseuxNumber px_abs(const PuiseuxNumber& x) { return x.sign() < 0 ? px_neg(x) : x; }

using PxVector = std::vector<PuiseuxNumber>;

struct PxChecked {
    PuiseuxNumber value;
    bool indeterminate = false;
};

inline PxChecked px_max(const std::vector<PuiseuxNumber>& xs)
{
    if (xs.empty()) throw std::invalid_argument("max of an empty list");
    PxChecked r{xs.front(), false};
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const auto o = px_compare(xs[i], r.value);
        if (o == PxOrder::Indeterminate) r.indeterminate = true;
        if (o == PxOrder::Greater) r.value = xs[i];
    }
    return r;
}

/// Max norm.
inline PxChecked px_norm(const PxVector& v)
{
    if (v.empty()) return {PuiseuxNumber{}, false};
    std::vector<PuiseuxNumber> a;
    for (const auto& x : v) a.push_back(px_abs(x));
    return px_max(a);
}

inline PxVector px_sub(const PxVector& a, const PxVector& b)
{
    if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
    PxVector r;
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(px_sub(a[i], b[i]));
    return r;
}

/// {t : 0 <= t <= right_end} (or < when open).
struct IntervalSubset {
    PuiseuxNumber right_end;
    bool closed = true;
    bool indeterminate = false;

    PxOrder contains(const PuiseuxNumber& t) const
    {
        const auto lo = px_compare(t, PuiseuxNumber{});
        const auto hi = px_compare(t, right_end);
        if (lo == PxOrder::Indeterminate || hi == PxOrder::Indeterminate) return PxOrder::Indeterminate;
        const bool in = lo != PxOrder::Less && (hi == PxOrder::Less || (closed && hi == PxOrder::Equal));
        return in ? PxOrder::Equal : PxOrder::Greater;
    }
};

/// dist(A, B) = [0, min_{a,b} |a - b|].
inline IntervalSubset px_dist_set(const std::vector<PxVector>& A, const std::vector<PxVector>& B)
{
    if (A.empty() || B.empty()) throw std::invalid_argument("dist needs nonempty sets");
    IntervalSubset r;
    bool first = true;
    for (const auto& a : A)
        for (const auto& b : B) {
            const auto n = px_norm(px_sub(a, b));
            r.indeterminate = r.indeterminate || n.indeterminate;
            if (first) {
                r.right_end = n.value;
                first = false;
                continue;
            }
            const auto o = px_compare(n.value, r.right_end);
            if (o == PxOrder::Indeterminate) r.indeterminate = true;
            if (o == PxOrder::Less) r.right_end = n.value;
        }
    return r;
}

// ---------------------------------------------------------------------------------------------
// Text syntax: "3/2*t^(1/2) + t^2 - 5*t^(7/3)", optional "+ O(t^r)" tail; "eps" is an alias of t.

namespace detail {

inline std::string exponent_string(const Rational& e)
{
    if (e == 1) return "";
    if (boost::multiprecision::denominator(e) == 1 && e > 0) return "^" + e.str();
    return "^(" + e.str() + ")";
}

struct PxMonomial {
    Rational coefficient{1};
    Rational t_exp{0};
    unsigned x_exp = 0;
};

struct PxParsed {
    std::vector<PxMonomial> monomials;
    Order error;
};

class PxParser {
public:
    PxParser(std::string s, bool allow_x) : s_(std::move(s)), allow_x_(allow_x) {}

    PxParsed parse()
    {
        PxParsed out;
        skip();
        bool neg = false;
        if (peek() == '+' || peek() == '-') neg = get() == '-';
        for (;;) {
            skip();
            if (peek() == 'O') {
                if (neg) fail("O-term cannot be negated");
                out.error = order_min(out.error, error_term());
            } else {
                auto m = term();
                if (neg) m.coefficient = -m.coefficient;
                out.monomials.push_back(m);
            }
            skip();
            if (pos_ == s_.size()) break;
            const char c = get();
            if (c != '+' && c != '-') fail(std::string("unexpected '") + c + "'");
            neg = c == '-';
        }
        return out;
    }

private:
    [[noreturn]] void fail(const std::string& why) const
    {
        throw std::invalid_argument("puiseux literal \"" + s_ + "\" at " + std::to_string(pos_) + ": " + why);
    }
    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    char peek()
    {
        skip();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }
    char get()
    {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        return s_[pos_++];
    }
    void expect(char c)
    {
        if (get() != c) fail(std::string("expected '") + c + "'");
    }
    Integer integer()
    {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (b == pos_) fail("expected digits");
        return Integer(s_.substr(b, pos_ - b));
    }
    Rational rational()
    {
        Rational q(integer());
        if (peek() == '/') {
            ++pos_;
            const Integer d = integer();
            if (d == 0) fail("zero denominator");
            q /= d;
        }
        return q;
    }
    Rational exponent()
    {
        if (peek() != '(') return rational();
        ++pos_;
        bool neg = false;
        if (peek() == '-') {
            ++pos_;
            neg = true;
        }
        Rational e = rational();
        expect(')');
        return neg ? Rational(-e) : e;
    }
    bool word(const char* w)
    {
        skip();
        const std::string ws(w);
        if (s_.compare(pos_, ws.size(), ws) != 0) return false;
        const std::size_t end = pos_ + ws.size();
        if (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) return false;
        pos_ = end;
        return true;
    }
    PxMonomial term()
    {
        PxMonomial m;
        for (;;) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c))) {
                m.coefficient *= rational();
            } else if (word("eps") || word("t")) {
                Rational e = 1;
                if (peek() == '^') {
                    ++pos_;
                    e = exponent();
                }
                m.t_exp += e;
            } else if (word("x")) {
                if (!allow_x_) fail("variable x not allowed here");
                Rational e = 1;
                if (peek() == '^') {
                    ++pos_;
                    e = exponent();
                }
                if (e < 0 || boost::multiprecision::denominator(e) != 1) fail("non-polynomial bound: x^" + e.str());
                m.x_exp += static_cast<unsigned>(boost::multiprecision::numerator(e));
            } else {
                fail("expected a factor");
            }
            if (peek() != '*') return m;
            ++pos_;
        }
    }
    Rational error_term()
    {
        expect('O');
        expect('(');
        if (!word("t") && !word("eps")) fail("expected t inside O()");
        Rational e = 1;
        if (peek() == '^') {
            ++pos_;
            e = exponent();
        }
        expect(')');
        return e;
    }

    std::string s_;
    bool allow_x_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string to_string(const PuiseuxNumber& x)
{
    std::string s;
    for (std::size_t i = 0; i < x.terms().size(); ++i) {
        const auto& [e, c] = x.terms()[i];
        const Rational a = c < 0 ? Rational(-c) : c;
        if (i == 0)
            s += c < 0 ? "-" : "";
        else
            s += c < 0 ? " - " : " + ";
        if (e == 0)
            s += a.str();
        else
            s += (a == 1 ? std::string() : a.str() + "*") + "t" + detail::exponent_string(e);
    }
    if (x.reliable()) s += (s.empty() ? "" : " + ") + std::string("O(t") + detail::exponent_string(*x.reliable()) + ")";
    return s.empty() ? "0" : s;
}

inline PuiseuxNumber px_parse(const std::string& s, Rational trunc = kDefaultTruncOrder)
{
    const auto p = detail::PxParser(s, false).parse();
    std::vector<PxTerm> t;
    for (const auto& m : p.monomials) t.push_back({m.t_exp, m.coefficient});
    return PuiseuxNumber::from_terms(std::move(t), std::move(trunc), p.error);
}

// ---------------------------------------------------------------------------------------------
// Polynomials in x with Puiseux coefficients (index = power of x)

using PxPoly = std::vector<PuiseuxNumber>;

inline PxPoly poly_parse(const std::string& s, Rational trunc = kDefaultTruncOrder)
{
    const auto p = detail::PxParser(s, true).parse();
    if (p.error) throw std::invalid_argument("O-terms are not allowed in cell bounds");
    PxPoly out;
    for (const auto& m : p.monomials) {
        if (out.size() <= m.x_exp) out.resize(m.x_exp + 1, PuiseuxNumber(Rational(0), trunc));
        out[m.x_exp] = px_add(out[m.x_exp], PuiseuxNumber::monomial(m.coefficient, m.t_exp, trunc));
    }
    if (out.empty()) out.push_back(PuiseuxNumber(Rational(0), trunc));
    return out;
}

inline std::string to_string(const PxPoly& p)
{
    std::string s;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].is_zero()) continue;
        if (!s.empty()) s += " + ";
        const std::string xs = k == 0 ? "" : (k == 1 ? "x" : "x^" + std::to_string(k));
        if (k == 0)
            s += "(" + to_string(p[k]) + ")";
        else
            s += (p[k] == PuiseuxNumber(1) ? "" : "(" + to_string(p[k]) + ")*") + xs;
    }
    return s.empty() ? "0" : s;
}

inline PuiseuxNumber poly_eval(const PxPoly& p, const PuiseuxNumber& x)
{
    PuiseuxNumber r(Rational(0), x.trunc_order());
    for (std::size_t k = p.size(); k-- > 0;) r = px_add(px_mul(r, x), p[k]);
    return r;
}

inline PxPoly poly_sub(const PxPoly& a, const PxPoly& b)
{
    PxPoly r(std::max(a.size(), b.size()));
    for (std::size_t k = 0; k < r.size(); ++k) {
        const PuiseuxNumber zero;
        r[k] = px_sub(k < a.size() ? a[k] : zero, k < b.size() ? b[k] : zero);
    }
    return r;
}

inline PxPoly poly_scale(const PxPoly& a, const PuiseuxNumber& c)
{
    PxPoly r;
    for (const auto& x : a) r.push_back(px_mul(x, c));
    return r;
}

inline PxPoly poly_add(const PxPoly& a, const PxPoly& b) { return poly_sub(a, poly_scale(b, PuiseuxNumber(-1))); }

/// Exact integral over [a, b] through the antiderivative.
inline PuiseuxNumber poly_integral(const PxPoly& p, const PuiseuxNumber& a, const PuiseuxNumber& b)
{
    PuiseuxNumber r(Rational(0), std::min(a.trunc_order(), b.trunc_order()));
    for (std::size_t k = 0; k < p.size(); ++k) {
        const auto span = px_sub(px_pow(b, static_cast<unsigned>(k + 1)), px_pow(a, static_cast<unsigned>(k + 1)));
        r = px_add(r, px_mul(p[k], px_mul(span, PuiseuxNumber(Rational(1, static_cast<int>(k + 1))))));
    }
    return r;
}

// ---------------------------------------------------------------------------------------------
// 2-D cell forms A_{a1, psi, b1, phi} = {a1 < x < b1, psi(x) < y < phi(x)}

struct CellForm2D {
    PuiseuxNumber a1, b1;
    PxPoly psi, phi;
};

/// a1 < b1, psi <= phi at both ends and psi < phi at the midpoint.
inline void validate(const CellForm2D& c)
{
    auto need = [](PxOrder o, bool strict, const char* what) {
        if (o == PxOrder::Indeterminate) throw std::invalid_argument(std::string(what) + ": indeterminate at truncation order");
        if (o == PxOrder::Greater || (strict && o == PxOrder::Equal)) throw std::invalid_argument(std::string(what) + " violated");
    };
    need(px_compare(c.a1, c.b1), true, "a1 < b1");
    const auto mid = px_mul(px_add(c.a1, c.b1), PuiseuxNumber(Rational(1, 2)));
    need(px_compare(poly_eval(c.psi, c.a1), poly_eval(c.phi, c.a1)), false, "psi <= phi at a1");
    need(px_compare(poly_eval(c.psi, c.b1), poly_eval(c.phi, c.b1)), false, "psi <= phi at b1");
    need(px_compare(poly_eval(c.psi, mid), poly_eval(c.phi, mid)), true, "psi < phi at the midpoint");
}

inline IntervalSubset px_vol_cell(const CellForm2D& c)
{
    validate(c);
    IntervalSubset r;
    r.right_end = poly_integral(poly_sub(c.phi, c.psi), c.a1, c.b1);
    return r;
}

inline CellForm2D parse_cell(const std::string& a1, const std::string& psi, const std::string& b1, const std::string& phi,
                             Rational trunc = kDefaultTruncOrder)
{
    return {px_parse(a1, trunc), px_parse(b1, trunc), poly_parse(psi, trunc), poly_parse(phi, trunc)};
}

struct ScalingReport {
    PuiseuxNumber width;  // half-gap w with phi - psi = 2w
    Rational c;
    PuiseuxNumber vol_w, vol_cw;
    bool ratio_exact = false;  // vol_cw == c * vol_w
};

/// Widen a constant-gap strip from half-width w to c*w about its centre line and compare volumes.
inline ScalingReport px_vol_scaling_check(const CellForm2D& cell, const Rational& c)
{
    if (c <= 0) throw std::invalid_argument("scaling factor must be positive");
    const PxPoly gap = poly_sub(cell.phi, cell.psi);
    for (std::size_t k = 1; k < gap.size(); ++k)
        if (!gap[k].is_zero()) throw std::invalid_argument("not a strip: phi - psi is not constant");
    ScalingReport r;
    r.c = c;
    const PuiseuxNumber half(Rational(1, 2));
    r.width = px_mul(gap[0], half);
    const PxPoly centre = poly_scale(poly_add(cell.phi, cell.psi), half);
    CellForm2D wide = cell;
    const PxPoly dw{px_mul(r.width, PuiseuxNumber(c))};
    wide.psi = poly_sub(centre, dw);
    wide.phi = poly_add(centre, dw);
    r.vol_w = px_vol_cell(cell).right_end;
    r.vol_cw = px_vol_cell(wide).right_end;
    r.ratio_exact = px_compare(r.vol_cw, px_mul(r.vol_w, PuiseuxNumber(c))) == PxOrder::Equal;
    return r;
}

// ---------------------------------------------------------------------------------------------
// Cube packings of rational cells

struct Square {
    Rational x0, y0, side;
};

struct Packing {
    std::vector<Square> squares;
    Rational area{0};
    int depth = 0;
};

namespace detail {

using RPoly = std::vector<Rational>;

struct RInterval {
    Rational lo, hi;
};

inline RInterval mul(const RInterval& a, const RInterval& b)
{
    const Rational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
}

/// Interval Horner enclosure of p over [x0, x1].
inline RInterval enclose(const RPoly& p, const Rational& x0, const Rational& x1)
{
    RInterval r{0, 0};
    const RInterval x{x0, x1};
    for (std::size_t k = p.size(); k-- > 0;) {
        r = mul(r, x);
        r.lo += p[k];
        r.hi += p[k];
    }
    return r;
}

inline RPoly rational_poly(const PxPoly& p)
{
    RPoly r;
    for (const auto& c : p) r.push_back(c.rational_value());
    return r;
}

}  // namespace detail

/// Greedy dyadic packing with at most k disjoint axis squares inside the closed cell.
/// Squares come from a quadtree over the bounding box, largest first; containment is certified
/// by exact interval enclosures of psi and phi.
inline Packing cube_packing(const CellForm2D& cell, std::size_t k, int max_depth = 24)
{
    validate(cell);
    const Rational a = cell.a1.rational_value(), b = cell.b1.rational_value();
    const auto psi = detail::rational_poly(cell.psi), phi = detail::rational_poly(cell.phi);
    const auto lo = detail::enclose(psi, a, b), hi = detail::enclose(phi, a, b);
    const Rational side = std::max(b - a, hi.hi - lo.lo);
    Packing out;
    std::vector<Square> frontier{{a, lo.lo, side}};
    for (int depth = 0; depth <= max_depth && !frontier.empty() && out.squares.size() < k; ++depth) {
        std::vector<Square> next;
        for (const auto& s : frontier) {
            const Rational x1 = s.x0 + s.side, y1 = s.y0 + s.side;
            if (x1 <= a || s.x0 >= b) continue;
            const auto ps = detail::enclose(psi, std::max(s.x0, a), std::min(x1, b));
            const auto ph = detail::enclose(phi, std::max(s.x0, a), std::min(x1, b));
            if (s.y0 >= ph.hi || y1 <= ps.lo) continue;
            if (s.x0 >= a && x1 <= b && ps.hi <= s.y0 && ph.lo >= y1) {
                if (out.squares.size() < k) {
                    out.squares.push_back(s);
                    out.area += s.side * s.side;
                    out.depth = depth;
                }
                continue;
            }
            const Rational h = s.side / 2;
            for (int i = 0; i < 4; ++i) next.push_back({s.x0 + (i & 1) * h, s.y0 + (i >> 1) * h, h});
        }
        frontier = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json to_json(const PuiseuxNumber& x)
{
    return {{"value", to_string(x)},
            {"trunc_order", x.trunc_order().str()},
            {"reliable", x.reliable() ? json(x.reliable()->str()) : json(nullptr)},
            {"truncation_loss", x.truncation_loss()}};
}

inline json to_json(const IntervalSubset& s)
{
    return {{"left", "0"}, {"right", to_string(s.right_end)}, {"closed", s.closed}, {"indeterminate", s.indeterminate}};
}

inline json to_json(const CellForm2D& c)
{
    return {{"a1", to_string(c.a1)}, {"b1", to_string(c.b1)}, {"psi", to_string(c.psi)}, {"phi", to_string(c.phi)}};
}

inline json to_json(const ScalingReport& r)
{
    return {{"width", to_string(r.width)}, {"c", r.c.str()},           {"vol_w", to_string(r.vol_w)},
            {"vol_cw", to_string(r.vol_cw)}, {"ratio_exact", r.ratio_exact}};
}

inline json to_json(const Packing& p)
{
    json sq = json::array();
    for (const auto& s : p.squares) sq.push_back({s.x0.str(), s.y0.str(), s.side.str()});
    return {{"count", p.squares.size()}, {"area", p.area.str()}, {"area_approx", static_cast<double>(p.area)}, {"squares", sq}};
}

}  // namespace germlens
