#pragma once

#include "germlens/directions.hpp"
#include "germlens/expr.hpp"
#include "germlens/fixtures.hpp"
#include "germlens/jsonio.hpp"
#include "germlens/seatangle.hpp"
#include "germlens/ssp.hpp"
#include "germlens/volume.hpp"

#include <initializer_list>
#include <set>
#include <stdexcept>
#include <string>

namespace germlens {

/// Schema violation; `path` is a JSON pointer into the config.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + what), path_(std::move(path))
    {
    }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Read-only cursor into a JSON config that remembers where it is.
class Node {
public:
    Node(const json& j, std::string path = "") : j_(&j), path_(std::move(path)) {}

    const json& raw() const { return *j_; }
    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }
    bool is_string() const { return j_->is_string(); }
    bool is_object() const { return j_->is_object(); }
    bool is_array() const { return j_->is_array(); }
    std::size_t size() const { return j_->size(); }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

    Node operator[](const std::string& key) const
    {
        if (!j_->is_object()) fail("expected an object");
        if (!j_->contains(key)) throw ConfigError(path_ + "/" + key, "required key is missing");
        return Node(j_->at(key), path_ + "/" + key);
    }
    Node operator[](std::size_t i) const
    {
        if (!j_->is_array()) fail("expected an array");
        if (i >= j_->size()) fail("index " + std::to_string(i) + " out of range");
        return Node(j_->at(i), path_ + "/" + std::to_string(i));
    }

    void only(std::initializer_list<const char*> keys) const
    {
        if (!j_->is_object()) fail("expected an object");
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [k, _] : j_->items())
            if (!allowed.count(k)) throw ConfigError(path_ + "/" + k, "unknown key");
    }

    double number() const
    {
        if (!j_->is_number()) fail("expected a number");
        return j_->get<double>();
    }
    double positive() const
    {
        const double v = number();
        if (!(v > 0.0)) fail("expected a positive number");
        return v;
    }
    long integer() const
    {
        if (!j_->is_number_integer()) fail("expected an integer");
        return j_->get<long>();
    }
    std::uint64_t u64() const
    {
        if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<long long>() >= 0))
            fail("expected a nonnegative integer");
        return j_->get<std::uint64_t>();
    }
    bool boolean() const
    {
        if (!j_->is_boolean()) fail("expected true or false");
        return j_->get<bool>();
    }
    std::string string() const
    {
        if (!j_->is_string()) fail("expected a string");
        return j_->get<std::string>();
    }
    std::vector<double> numbers() const
    {
        if (!j_->is_array()) fail("expected an array of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < size(); ++i) v.push_back((*this)[i].number());
        return v;
    }
    Point point() const
    {
        const auto v = numbers();
        if (v.empty()) fail("expected a nonempty vector");
        return Eigen::Map<const Point>(v.data(), static_cast<Eigen::Index>(v.size()));
    }

    double number_or(const std::string& key, double def) const { return has(key) ? (*this)[key].number() : def; }
    double positive_or(const std::string& key, double def) const { return has(key) ? (*this)[key].positive() : def; }
    long integer_or(const std::string& key, long def) const { return has(key) ? (*this)[key].integer() : def; }
    bool boolean_or(const std::string& key, bool def) const { return has(key) ? (*this)[key].boolean() : def; }
    std::string string_or(const std::string& key, const std::string& def) const
    {
        return has(key) ? (*this)[key].string() : def;
    }

private:
    const json* j_;
    std::string path_;
};

// ---------------------------------------------------------------------------------------------
// Expressions over coordinates

namespace detail {

inline const char* coord_name(int i)
{
    static const char* names[] = {"x", "y", "z", "w"};
    return i < 4 ? names[i] : nullptr;
}

/// Env with x, y, z, w and x1..xn bound to the coordinates of p.
inline Expr::Env coord_env(const Point& p)
{
    Expr::Env env;
    for (int i = 0; i < p.size(); ++i) {
        if (const char* c = coord_name(i)) env[c] = p[i];
        env["x" + std::to_string(i + 1)] = p[i];
    }
    return env;
}

inline Expr expr_at(const Node& n)
{
    try {
        return Expr::parse(n.string());
    } catch (const ExprError& e) {
        n.fail(e.what());
    }
}

/// Evaluates once so unknown variables surface as schema errors.
inline void probe_expr(const Node& n, const Expr& e, const Expr::Env& env)
{
    try {
        (void)e.eval(env);
    } catch (const ExprError& err) {
        n.fail(err.what());
    }
}

inline Polynomial polynomial_at(const Node& n, int dim)
{
    if (!n.is_array() || n.size() == 0) n.fail("expected a polynomial as rows [coeff, e_1, ..., e_n]");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto r = n[i].numbers();
        if (static_cast<int>(r.size()) != dim + 1) n[i].fail("row needs 1 + " + std::to_string(dim) + " entries");
        rows.push_back(r);
    }
    try {
        return Polynomial::from_rows(dim, rows);
    } catch (const std::invalid_argument& e) {
        n.fail(e.what());
    }
}

inline int dim_at(const Node& n)
{
    const long d = n["n"].integer();
    if (d < 1 || d > 16) n["n"].fail("ambient dimension must be in [1, 16]");
    return static_cast<int>(d);
}

}  // namespace detail

LipschitzMap map_from_config(const Node& n, int dim);

/// Germ entry: a catalog name, {"fixture", "role"}, or an inline object with a "type".
inline GermSet germ_from_config(const Node& n)
{
    if (n.is_string()) {
        try {
            return germ_by_name(n.string());
        } catch (const std::out_of_range& e) {
            n.fail(e.what());
        }
    }
    if (!n.is_object()) n.fail("germ entry must be a name or an object");
    if (n.has("fixture")) {
        n.only({"fixture", "role"});
        try {
            return fixture(n["fixture"].string()).germ(n.string_or("role", "A"));
        } catch (const std::out_of_range& e) {
            n.fail(e.what());
        }
    }
    const std::string type = n["type"].string();
    const std::string name = n.string_or("name", type);
    if (type == "semialgebraic") {
        n.only({"type", "name", "n", "equations", "signs"});
        const int dim = detail::dim_at(n);
        std::vector<Polynomial> eqs;
        const Node E = n["equations"];
        if (!E.is_array() || E.size() == 0) E.fail("expected a nonempty list of polynomials");
        for (std::size_t i = 0; i < E.size(); ++i) eqs.push_back(detail::polynomial_at(E[i], dim));
        std::vector<SignCondition> signs;
        if (n.has("signs")) {
            const Node S = n["signs"];
            if (!S.is_array()) S.fail("expected a list of sign conditions");
            for (std::size_t i = 0; i < S.size(); ++i) {
                S[i].only({"op", "poly"});
                const std::string op = S[i]["op"].string();
                SignCondition c;
                if (op == ">=") c.op = SignCondition::Op::Ge;
                else if (op == ">") c.op = SignCondition::Op::Gt;
                else if (op == "<=") c.op = SignCondition::Op::Le;
                else if (op == "<") c.op = SignCondition::Op::Lt;
                else S[i]["op"].fail("op must be one of >=, >, <=, <");
                c.p = detail::polynomial_at(S[i]["poly"], dim);
                signs.push_back(std::move(c));
            }
        }
        return semialgebraic(name, dim, std::move(eqs), std::move(signs));
    }
    if (type == "parametric") {
        n.only({"type", "name", "n", "branches", "s_max"});
        const int dim = detail::dim_at(n);
        const Node B = n["branches"];
        if (!B.is_array() || B.size() == 0) B.fail("expected a nonempty list of branches");
        std::vector<std::function<Point(double)>> branches;
        for (std::size_t b = 0; b < B.size(); ++b) {
            if (!B[b].is_array() || static_cast<int>(B[b].size()) != dim) B[b].fail("branch needs one expression in s per coordinate");
            std::vector<Expr> comps;
            for (int i = 0; i < dim; ++i) {
                comps.push_back(detail::expr_at(B[b][static_cast<std::size_t>(i)]));
                detail::probe_expr(B[b][static_cast<std::size_t>(i)], comps.back(), {{"s", 0.5}});
            }
            branches.push_back([comps, dim](double s) {
                Point p(dim);
                for (int i = 0; i < dim; ++i) p[i] = comps[static_cast<std::size_t>(i)]("s", s);
                return p;
            });
        }
        return parametric(name, dim, std::move(branches), n.positive_or("s_max", 1.0));
    }
    if (type == "sequence") {
        n.only({"type", "name", "n", "point", "m0"});
        const int dim = detail::dim_at(n);
        const Node P = n["point"];
        if (!P.is_array() || static_cast<int>(P.size()) != dim) P.fail("point needs one expression in m per coordinate");
        std::vector<Expr> comps;
        for (int i = 0; i < dim; ++i) {
            comps.push_back(detail::expr_at(P[static_cast<std::size_t>(i)]));
            detail::probe_expr(P[static_cast<std::size_t>(i)], comps.back(), {{"m", 2.0}});
        }
        const long m0 = n.integer_or("m0", 1);
        if (m0 < 1) n["m0"].fail("m0 must be >= 1");
        return sequence(name, dim, [comps, dim](std::int64_t m) {
            Point p(dim);
            for (int i = 0; i < dim; ++i) p[i] = comps[static_cast<std::size_t>(i)]("m", static_cast<double>(m));
            return p;
        }, m0);
    }
    if (type == "subspace") {
        n.only({"type", "name", "basis"});
        const Node B = n["basis"];
        if (!B.is_array() || B.size() == 0) B.fail("expected a nonempty list of vectors");
        const Point first = B[0].point();
        Eigen::MatrixXd M(first.size(), static_cast<Eigen::Index>(B.size()));
        for (std::size_t j = 0; j < B.size(); ++j) {
            const Point v = B[j].point();
            if (v.size() != first.size()) B[j].fail("basis vectors must share a dimension");
            M.col(static_cast<Eigen::Index>(j)) = v;
        }
        try {
            return subspace(name, M);
        } catch (const std::invalid_argument& e) {
            n.fail(e.what());
        }
    }
    if (type == "ray") {
        n.only({"type", "name", "direction"});
        const Point d = n["direction"].point();
        if (d.norm() == 0.0) n["direction"].fail("direction must be nonzero");
        return ray(name, d);
    }
    if (type == "cone") {
        n.only({"type", "name", "directions", "eta"});
        const Node D = n["directions"];
        if (!D.is_array() || D.size() == 0) D.fail("expected a nonempty list of directions");
        Cloud dirs;
        for (std::size_t i = 0; i < D.size(); ++i) {
            const Point d = D[i].point();
            if (d.norm() == 0.0 || (!dirs.empty() && d.size() != dirs[0].size())) D[i].fail("bad direction");
            dirs.push_back(d.normalized());
        }
        return cone(name, std::move(dirs), n.positive_or("eta", 0.05));
    }
    if (type == "full") {
        n.only({"type", "name", "n"});
        return full_space(detail::dim_at(n));
    }
    if (type == "mapped") {
        n.only({"type", "name", "base", "map"});
        const GermSet base = germ_from_config(n["base"]);
        const LipschitzMap h = map_from_config(n["map"], base.dim());
        try {
            return mapped(base, h, n.string_or("name", ""));
        } catch (const std::invalid_argument& e) {
            n.fail(e.what());
        }
    }
    n["type"].fail("unknown germ type '" + type + "'");
}

/// Map entry: a catalog name or {"type": "linear" | "expr" | "compose" | "identity", ...}.
inline LipschitzMap map_from_config(const Node& n, int dim)
{
    if (n.is_string()) {
        try {
            const LipschitzMap h = map_by_name(n.string(), dim);
            if (h.dim != dim) n.fail("map '" + h.name + "' acts on dimension " + std::to_string(h.dim));
            return h;
        } catch (const std::out_of_range& e) {
            n.fail(e.what());
        }
    }
    if (!n.is_object()) n.fail("map entry must be a name or an object");
    const std::string type = n["type"].string();
    if (type == "identity") {
        n.only({"type"});
        return identity_map(dim);
    }
    if (type == "linear") {
        n.only({"type", "name", "matrix"});
        const Node M = n["matrix"];
        if (!M.is_array() || static_cast<int>(M.size()) != dim) M.fail("matrix needs " + std::to_string(dim) + " rows");
        Eigen::MatrixXd A(dim, dim);
        for (int i = 0; i < dim; ++i) {
            const Point r = M[static_cast<std::size_t>(i)].point();
            if (r.size() != dim) M[static_cast<std::size_t>(i)].fail("row needs " + std::to_string(dim) + " entries");
            A.row(i) = r.transpose();
        }
        try {
            return linear_map(A, n.string_or("name", "linear"));
        } catch (const std::invalid_argument& e) {
            n.fail(e.what());
        }
    }
    if (type == "expr") {
        n.only({"type", "name", "forward", "inverse", "K1", "K2"});
        auto comps = [&](const Node& F) {
            if (!F.is_array() || static_cast<int>(F.size()) != dim) F.fail("needs one expression per coordinate");
            std::vector<Expr> out;
            for (int i = 0; i < dim; ++i) {
                out.push_back(detail::expr_at(F[static_cast<std::size_t>(i)]));
                detail::probe_expr(F[static_cast<std::size_t>(i)], out.back(), detail::coord_env(Point::Constant(dim, 0.1)));
            }
            return out;
        };
        auto as_map = [dim](std::vector<Expr> e) -> PointMap {
            return [e = std::move(e), dim](const Point& x) {
                const auto env = detail::coord_env(x);
                Point y(dim);
                for (int i = 0; i < dim; ++i) y[i] = e[static_cast<std::size_t>(i)].eval(env);
                return y;
            };
        };
        LipschitzMap h;
        h.name = n.string_or("name", "expr");
        h.dim = dim;
        h.forward = as_map(comps(n["forward"]));
        if (n.has("inverse")) h.inverse = as_map(comps(n["inverse"]));
        if (n.has("K1") != n.has("K2")) n.fail("K1 and K2 must be given together");
        if (n.has("K1")) {
            h.K1 = n["K1"].positive();
            h.K2 = n["K2"].positive();
            if (*h.K1 > *h.K2) n.fail("K1 must not exceed K2");
            h.provenance = "claimed";
        }
        return h;
    }
    if (type == "compose") {
        n.only({"type", "maps"});
        const Node M = n["maps"];
        if (!M.is_array() || M.size() == 0) M.fail("expected a nonempty list of maps");
        LipschitzMap h = map_from_config(M[0], dim);
        for (std::size_t i = 1; i < M.size(); ++i) h = compose(map_from_config(M[i], dim), h);
        return h;
    }
    n["type"].fail("unknown map type '" + type + "'");
}

/// Gauge entry: {"C", "alpha"} monomial or {"t": [...], "v": [...]} table.
inline Gauge gauge_from_config(const Node& n)
{
    if (!n.is_object()) n.fail("gauge entry must be an object");
    try {
        if (n.has("t")) {
            n.only({"t", "v"});
            return Gauge::tabulated(n["t"].numbers(), n["v"].numbers());
        }
        n.only({"C", "alpha", "t_max"});
        return Gauge::monomial(n.positive_or("C", 1.0), n["alpha"].positive(), n.positive_or("t_max", 1.0));
    } catch (const std::invalid_argument& e) {
        n.fail(e.what());
    }
}

inline json gauge_json(const Gauge& g)
{
    if (const auto m = g.as_monomial()) return {{"C", m->C}, {"alpha", m->alpha}, {"t_max", g.t_max()}};
    return {{"form", "tabulated"}, {"t_max", g.t_max()}};
}

inline Schedule schedule_from_config(const Node& n, Schedule s = {})
{
    n.only({"r0", "ratio", "shells"});
    s.r0 = n.positive_or("r0", s.r0);
    s.ratio = n.positive_or("ratio", s.ratio);
    s.shells = static_cast<int>(n.integer_or("shells", s.shells));
    if (s.ratio >= 1.0) n["ratio"].fail("ratio must be < 1");
    if (s.shells < 2 || s.shells > 64) n["shells"].fail("shells must be in [2, 64]");
    return s;
}

inline std::vector<double> eps_grid(const Node& n)
{
    auto v = n.numbers();
    if (v.empty()) n.fail("eps grid is empty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) n[i].fail("eps must be positive");
        if (i > 0 && !(v[i] < v[i - 1])) n[i].fail("eps grid must be strictly decreasing");
    }
    return v;
}

}  // namespace germlens
