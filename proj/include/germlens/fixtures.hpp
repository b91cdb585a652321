#pragma once

#include "germlens/germ.hpp"
#include "germlens/maps.hpp"

#include "json.hpp"

#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace germlens {

inline Point vec(std::initializer_list<double> v)
{
    Point p(static_cast<int>(v.size()));
    int i = 0;
    for (double x : v) p[i++] = x;
    return p;
}

/// Nearest point of the curve u -> c(u), u in [lo, hi]: grid scan, then golden section around each local minimum.
inline Point numeric_curve_foot(const std::function<Point(double)>& c, double lo, double hi, const Point& x,
                                int grid = 2048)
{
    std::vector<double> f(static_cast<std::size_t>(grid) + 1);
    const double h = (hi - lo) / grid;
    for (int i = 0; i <= grid; ++i) f[static_cast<std::size_t>(i)] = (c(lo + i * h) - x).squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    double best_u = lo;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i <= grid; ++i) {
        const double fi = f[static_cast<std::size_t>(i)];
        const bool left = i == 0 || fi <= f[static_cast<std::size_t>(i - 1)];
        const bool right = i == grid || fi <= f[static_cast<std::size_t>(i + 1)];
        if (!left || !right) continue;
        double a = lo + std::max(0, i - 1) * h, b = lo + std::min(grid, i + 1) * h;
        auto F = [&](double u) { return (c(u) - x).squaredNorm(); };
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = F(x1), f2 = F(x2);
        for (int it = 0; it < 200 && b - a > 1e-17 * std::max(1.0, std::fabs(a)); ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = F(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = F(x2);
            }
        }
        for (double u : {a, b, 0.5 * (a + b), lo + i * h}) {
            const double v = F(u);
            if (v < best) {
                best = v;
                best_u = u;
            }
        }
    }
    return c(best_u);
}

namespace fx {

inline Polynomial poly(int n, std::vector<std::vector<double>> rows) { return Polynomial::from_rows(n, rows); }

/// Surface of revolution about the z-axis with profile rho = p(z); the foot lies in the meridian half-plane of x.
inline std::function<std::optional<Point>(const Point&)> revolution_foot(std::function<double(double)> profile)
{
    return [profile](const Point& x) -> std::optional<Point> {
        const double rho = std::hypot(x[0], x[1]);
        const double R = x.norm();
        const Point q = vec({rho, x[2]});
        auto curve = [&](double w) { return vec({profile(w), w}); };
        const Point f = numeric_curve_foot(curve, -2.0 * R - 1e-300, 2.0 * R + 1e-300, q);
        Point out(3);
        const double cx = rho > 0.0 ? x[0] / rho : 1.0, cy = rho > 0.0 ? x[1] / rho : 0.0;
        out << f[0] * cx, f[0] * cy, f[1];
        return out;
    };
}

// x^2 + y^2 = z^6
inline GermSet V()
{
    return semialgebraic("V", 3, {poly(3, {{1, 2, 0, 0}, {1, 0, 2, 0}, {-1, 0, 0, 6}})})
        .with_oracle(revolution_foot([](double w) { return std::fabs(w * w * w); }), "numerical");
}

// x^2 + y^2 = z^2; exact foot on the two generating lines of the meridian plane
inline GermSet cone_z()
{
    auto foot = [](const Point& x) -> std::optional<Point> {
        const double rho = std::hypot(x[0], x[1]);
        const double cx = rho > 0.0 ? x[0] / rho : 1.0, cy = rho > 0.0 ? x[1] / rho : 0.0;
        Point best = Point::Zero(3);
        double bd = x.norm();
        for (double s : {1.0, -1.0}) {
            const double t = std::max(0.0, (rho + s * x[2]) / std::sqrt(2.0));
            Point p(3);
            p << t / std::sqrt(2.0) * cx, t / std::sqrt(2.0) * cy, s * t / std::sqrt(2.0);
            if ((p - x).norm() < bd) {
                bd = (p - x).norm();
                best = p;
            }
        }
        return best;
    };
    return semialgebraic("cone_z", 3, {poly(3, {{1, 2, 0, 0}, {1, 0, 2, 0}, {-1, 0, 0, 2}})}).with_oracle(foot, "exact");
}

// x^2 + z^2 = y^2, the same cone around the y-axis
inline GermSet cone_y()
{
    const GermSet cz = cone_z();
    auto swap = [](const Point& x) { return vec({x[0], x[2], x[1]}); };
    auto foot = [cz, swap](const Point& x) -> std::optional<Point> { return swap(*cz.foot(swap(x))); };
    return semialgebraic("cone_y", 3, {poly(3, {{1, 2, 0, 0}, {1, 0, 0, 2}, {-1, 0, 2, 0}})}).with_oracle(foot, "exact");
}

// y^2 = x^3, foot via the parametrisation u -> (u^2, u^3)
inline GermSet cusp()
{
    auto foot = [](const Point& x) -> std::optional<Point> {
        const double R = std::sqrt(x.norm()) * 2.0 + 1e-300;
        return numeric_curve_foot([](double u) { return vec({u * u, u * u * u}); }, -R, R, x);
    };
    return semialgebraic("cusp", 2, {poly(2, {{1, 0, 2}, {-1, 3, 0}})}).with_oracle(foot, "numerical");
}

// y = x^3
inline GermSet cubic_graph()
{
    auto foot = [](const Point& x) -> std::optional<Point> {
        const double R = 2.0 * x.norm() + 1e-300;
        return numeric_curve_foot([](double u) { return vec({u, u * u * u}); }, -R, R, x);
    };
    return semialgebraic("cubic_graph", 2, {poly(2, {{1, 0, 1}, {-1, 3, 0}})}).with_oracle(foot, "numerical");
}

inline GermSet axis(int n, int i, std::string name)
{
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, 1);
    B(i, 0) = 1.0;
    return subspace(std::move(name), B);
}

inline GermSet coord_plane(int i, int j, std::string name)
{
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3, 2);
    B(i, 0) = 1.0;
    B(j, 1) = 1.0;
    return subspace(std::move(name), B);
}

inline double osc(double x) { return x == 0.0 ? 0.0 : x * std::sin(std::log(std::fabs(x))); }

// graph of x sin(ln|x|)
inline GermSet oscillation_graph()
{
    auto foot = [](const Point& x) -> std::optional<Point> {
        const double R = 2.0 * x.norm() + 1e-300;
        return numeric_curve_foot([](double u) { return vec({u, osc(u)}); }, -R, R, x, 8192);
    };
    return parametric("osc_graph", 2,
                      {[](double s) { return vec({s, osc(s)}); }, [](double s) { return vec({-s, osc(-s)}); }})
        .with_oracle(foot, "numerical");
}

// X -> (X e^{-1/X^2}, e^{-1/X^2}), X in (0, 1]
inline GermSet example45_curve()
{
    // foot searched in the height y, where the curve is (y / sqrt(ln 1/y), y)
    auto foot = [](const Point& x) -> std::optional<Point> {
        const double R = std::min(2.0 * x.norm(), std::exp(-1.0));
        auto c = [](double y) { return y <= 0.0 ? vec({0.0, 0.0}) : vec({y / std::sqrt(-std::log(y)), y}); };
        return numeric_curve_foot(c, 0.0, R, x);
    };
    return parametric("pi_B", 2, {[](double X) {
                          const double y = std::exp(-1.0 / (X * X));
                          return vec({X * y, y});
                      }})
        .with_oracle(foot, "numerical");
}

inline double partial_e(std::int64_t m)
{
    double s = 1.0, term = 1.0;
    for (std::int64_t k = 1; k <= std::min<std::int64_t>(m, 40); ++k) {
        term /= static_cast<double>(k);
        s += term;
    }
    return s;
}

inline GermSet seq_a()
{
    return sequence("a_m", 2, [](std::int64_t m) {
        const double im = 1.0 / static_cast<double>(m);
        return vec({im, im * partial_e(m)});
    });
}

inline GermSet seq_b()
{
    return sequence("b_m", 2, [](std::int64_t m) { return vec({0.0, partial_e(m) / static_cast<double>(m)}); });
}

}  // namespace fx

// ---------------------------------------------------------------------------------------------
// Maps

namespace fx {

inline LipschitzMap cube_z()
{
    LipschitzMap h;
    h.name = "cube_z";
    h.dim = 3;
    h.forward = [](const Point& x) { return vec({x[0], x[1], x[2] * x[2] * x[2]}); };
    h.inverse = [](const Point& y) { return vec({y[0], y[1], std::cbrt(y[2])}); };
    h.provenance = "none";
    return h;
}

inline LipschitzMap oscillation()
{
    LipschitzMap h;
    h.name = "oscillation";
    h.dim = 2;
    h.forward = [](const Point& x) { return vec({x[0], x[1] + osc(x[0])}); };
    h.inverse = [](const Point& y) { return vec({y[0], y[1] - osc(y[0])}); };
    // Jacobian [[1,0],[m,1]] with |m| = |sin ln|x| + cos ln|x|| <= sqrt 2
    h.K2 = (std::sqrt(6.0) + std::sqrt(2.0)) / 2.0;
    h.K1 = (std::sqrt(6.0) - std::sqrt(2.0)) / 2.0;
    h.provenance = "analytic";
    return h;
}

/// Extreme singular values of [[1, s], [0, 1]] for |s| <= L.
inline std::pair<double, double> shear_constants(double L)
{
    const double k2 = 0.5 * (L + std::sqrt(L * L + 4.0));
    return {1.0 / k2, k2};
}

/// (x, y) -> (x - phi(y), y) with phi piecewise linear, phi(s_m / m) = 1/m, phi odd; sends a_m to b_m.
inline LipschitzMap example21_map()
{
    constexpr int kNodes = 24;
    std::vector<double> ys, ps;
    for (int m = kNodes; m >= 1; --m) {
        ys.push_back(partial_e(m) / m);
        ps.push_back(1.0 / m);
    }
    const double tail = ps.front() / ys.front();
    auto phi_pos = [ys, ps, tail](double y) {
        if (y <= ys.front()) return tail * y;
        if (y >= ys.back()) return ps.back() + (y - ys.back()) * 0.5;
        const auto it = std::upper_bound(ys.begin(), ys.end(), y);
        const std::size_t i = static_cast<std::size_t>(it - ys.begin());
        const double w = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
        return ps[i - 1] + w * (ps[i] - ps[i - 1]);
    };
    double L = std::max(tail, 0.5);
    for (std::size_t i = 1; i < ys.size(); ++i) L = std::max(L, (ps[i] - ps[i - 1]) / (ys[i] - ys[i - 1]));
    auto phi = [phi_pos](double y) { return y >= 0 ? phi_pos(y) : -phi_pos(-y); };
    LipschitzMap h;
    h.name = "example21_map";
    h.dim = 2;
    h.forward = [phi](const Point& x) { return vec({x[0] - phi(x[1]), x[1]}); };
    h.inverse = [phi](const Point& y) { return vec({y[0] + phi(y[1]), y[1]}); };
    const auto [k1, k2] = shear_constants(L);
    h.K1 = k1;
    h.K2 = k2;
    h.provenance = "analytic";
    return h;
}

inline LipschitzMap shear2(double s = 0.7)
{
    Eigen::MatrixXd M(2, 2);
    M << 1, s, 0, 1;
    return linear_map(M, "shear2");
}

inline LipschitzMap shear3(double s = 0.6)
{
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(3, 3);
    M(0, 2) = s;
    return linear_map(M, "shear3");
}

inline LipschitzMap rotation3(double angle = 0.7)
{
    // rotation about the axis (1,1,1)/sqrt 3
    const Eigen::Vector3d ax = Eigen::Vector3d(1, 1, 1).normalized();
    const Eigen::MatrixXd R = Eigen::AngleAxisd(angle, ax).toRotationMatrix();
    return linear_map(R, "rotation3");
}

inline LipschitzMap rotation2(double angle = 0.5)
{
    Eigen::MatrixXd R(2, 2);
    R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return linear_map(R, "rotation2");
}

inline LipschitzMap stretch3()
{
    Eigen::MatrixXd M(3, 3);
    M << 2, 0.3, 0, 0, 1, 0.5, 0.2, 0, 0.8;
    return linear_map(M, "linear3");
}

/// Seeded linear map I + 0.5 G / sqrt n with condition number at most 8.
inline LipschitzMap random_linear(int n, std::uint64_t seed)
{
    Rng rng = make_rng(seed, 0x11AE);
    for (;;) {
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) M(i, j) += 0.5 * gaussian(rng) / std::sqrt(static_cast<double>(n));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
        const auto& s = svd.singularValues();
        if (s[n - 1] > 0 && s[0] / s[n - 1] <= 8.0) return linear_map(M, "random_linear_" + std::to_string(seed));
    }
}

/// x -> x (1 + |x|); constants hold on the ball of radius 1/2.
inline LipschitzMap radial_grow(int n)
{
    LipschitzMap h;
    h.name = "radial_grow";
    h.dim = n;
    h.forward = [](const Point& x) -> Point { return x * (1.0 + x.norm()); };
    h.inverse = [](const Point& y) -> Point {
        const double r = y.norm();
        if (r == 0.0) return y;
        const double s = 0.5 * (std::sqrt(1.0 + 4.0 * r) - 1.0);
        return y * (s / r);
    };
    h.K1 = 1.0;
    h.K2 = 2.0;
    h.provenance = "analytic";
    return h;
}

/// x -> x (1.5 + 0.5 x_1/|x|), degree-1 homogeneous, direction preserving.
inline LipschitzMap radial_angular(int n)
{
    LipschitzMap h;
    h.name = "radial_angular";
    h.dim = n;
    h.forward = [](const Point& x) -> Point {
        const double r = x.norm();
        if (r == 0.0) return x;
        return x * (1.5 + 0.5 * x[0] / r);
    };
    h.inverse = [](const Point& y) -> Point {
        const double r = y.norm();
        if (r == 0.0) return y;
        return y / (1.5 + 0.5 * y[0] / r);
    };
    // Dh = rho I + u g^T with g tangential, |g| = 0.5 sqrt(1 - c^2), rho = 1.5 + 0.5 c, c = u_1
    double k1 = std::numeric_limits<double>::infinity(), k2 = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double c = -1.0 + 2.0 * i / 20000.0;
        const double rho = 1.5 + 0.5 * c, g = 0.5 * std::sqrt(std::max(0.0, 1.0 - c * c));
        const double root = std::sqrt(rho * rho + 0.25 * g * g);
        k1 = std::min(k1, root - 0.5 * g);
        k2 = std::max(k2, root + 0.5 * g);
    }
    h.K1 = k1;
    h.K2 = k2;
    h.provenance = "analytic";
    return h;
}

inline LipschitzMap scaling(int n, double lambda)
{
    return linear_map(lambda * Eigen::MatrixXd::Identity(n, n), "scale_" + std::to_string(lambda));
}

}  // namespace fx

// ---------------------------------------------------------------------------------------------
// Catalog

struct GroundTruth {
    std::string key;
    nlohmann::json value;
    std::string provenance;  // analytic | example | numerical-oracle
};

struct HypothesisFlags {
    bool definable = true;
    bool bi_lipschitz = true;
    bool image_definable = true;
};

struct Fixture {
    std::string name;
    std::vector<std::pair<std::string, GermSet>> germs;
    std::optional<LipschitzMap> map;
    std::vector<GroundTruth> truth;
    HypothesisFlags flags;
    bool invariant_excluded = false;
    std::optional<Schedule> schedule;
    std::string note;

    const GermSet& germ(const std::string& role) const
    {
        for (const auto& [r, g] : germs)
            if (r == role) return g;
        throw std::out_of_range("fixture '" + name + "' has no germ '" + role + "'");
    }
    const GroundTruth& truth_of(const std::string& key) const
    {
        for (const auto& t : truth)
            if (t.key == key) return t;
        throw std::out_of_range("fixture '" + name + "' has no ground truth '" + key + "'");
    }
};

inline std::vector<Fixture> catalog()
{
    
    std::vector<Fixture> out;
    {
        Fixture f;
        f.name = "example11";
        f.germs = {{"A", fx::V()}, {"hA", fx::cone_z()}};
        f.map = fx::cube_z();
        f.flags = {true, false, true};
        f.truth = {{"dim_D_A", 0, "example"},
                   {"dim_D_hA", 1, "example"},
                   {"D_A", nlohmann::json::array({{0, 0, 1}, {0, 0, -1}}), "analytic"},
                   {"gauge_alpha_A_to_LD", 2.0, "analytic"}};
        f.note = "h is a semialgebraic homeomorphism, not bi-Lipschitz";
        out.push_back(std::move(f));
    }
    {
        Fixture f;
        f.name = "example12";
        f.germs = {{"A", fx::axis(2, 0, "x_axis")}, {"hA", fx::oscillation_graph()}};
        f.map = fx::oscillation();
        f.flags = {true, true, false};
        f.truth = {{"dim_D_A", 0, "example"},
                   {"dim_D_hA", 1, "example"},
                   {"D_hA_half_angle", std::numbers::pi / 4, "analytic"}};
        f.note = "bi-Lipschitz image of a line whose direction set is an arc; the image is not definable";
        out.push_back(std::move(f));
    }
    {
        Fixture f;
        f.name = "example21";
        f.germs = {{"A", fx::seq_a()}, {"hA", fx::seq_b()}};
        f.map = fx::example21_map();
        f.flags = {true, true, true};
        f.invariant_excluded = true;
        const double e = std::numbers::e;
        f.truth = {{"D_A", nlohmann::json::array({{1 / std::sqrt(1 + e * e), e / std::sqrt(1 + e * e)}}), "example"},
                   {"D_hA", nlohmann::json::array({{0, 1}}), "example"}};
        f.note = "over the real algebraic numbers the limit direction of a_m is missing; "
                 "floating point cannot exhibit this field dependence, so the fixture is documentation only";
        out.push_back(std::move(f));
    }
    {
        Fixture f;
        f.name = "example45";
        f.germs = {{"A", fx::example45_curve()}, {"LD", ray("y_ray", vec({0, 1}))}};
        f.flags = {true, true, true};
        f.truth = {{"LD_A", "positive y-axis", "example"}, {"monomial_gauge", false, "example"}};
        f.schedule = Schedule{1e-12, 0.1, 12};
        f.note = "g = dist/|x| decays like (ln 1/r)^(-1/2); log-log slopes only fall below 0.02 deep in the germ";
        out.push_back(std::move(f));
    }
    auto elementary = [&](std::string name, GermSet g, int dimD, nlohmann::json extra = nullptr) {
        Fixture f;
        f.name = std::move(name);
        f.germs = {{"A", std::move(g)}};
        f.truth = {{"dim_D_A", dimD, "analytic"}};
        if (!extra.is_null()) f.truth.push_back({"gauge_alpha_A_to_LD", extra, "analytic"});
        out.push_back(std::move(f));
    };
    elementary("x_axis2", fx::axis(2, 0, "x_axis"), 0);
    elementary("y_axis2", fx::axis(2, 1, "y_axis"), 0);
    elementary("z_axis", fx::axis(3, 2, "z_axis"), 0);
    elementary("plane_z0", fx::coord_plane(0, 1, "plane_z0"), 1);
    elementary("plane_y0", fx::coord_plane(0, 2, "plane_y0"), 1);
    elementary("cone_z", fx::cone_z(), 1);
    elementary("cone_y", fx::cone_y(), 1);
    elementary("cusp", fx::cusp(), 0, 0.5);
    elementary("cubic_graph", fx::cubic_graph(), 0, 2.0);
    elementary("ray_y", ray("y_ray", vec({0, 1})), 0);
    elementary("space3", full_space(3), 2);
    return out;
}

inline std::vector<std::string> fixture_names()
{
    std::vector<std::string> names;
    for (const auto& f : catalog()) names.push_back(f.name);
    return names;
}

inline Fixture fixture(const std::string& name)
{
    for (auto& f : catalog())
        if (f.name == name) return f;
    throw std::out_of_range("unknown fixture '" + name + "'");
}

/// Named germs usable from configs.
inline GermSet germ_by_name(const std::string& name)
{
    static const std::map<std::string, std::function<GermSet()>> table{
        {"V", fx::V},
        {"hV", fx::cone_z},
        {"cone_z", fx::cone_z},
        {"cone_y", fx::cone_y},
        {"cusp", fx::cusp},
        {"cubic_graph", fx::cubic_graph},
        {"osc_graph", fx::oscillation_graph},
        {"pi_B", fx::example45_curve},
        {"a_m", fx::seq_a},
        {"b_m", fx::seq_b},
        {"x_axis2", [] { return fx::axis(2, 0, "x_axis2"); }},
        {"y_axis2", [] { return fx::axis(2, 1, "y_axis2"); }},
        {"x_axis3", [] { return fx::axis(3, 0, "x_axis3"); }},
        {"y_axis3", [] { return fx::axis(3, 1, "y_axis3"); }},
        {"z_axis", [] { return fx::axis(3, 2, "z_axis"); }},
        {"plane_z0", [] { return fx::coord_plane(0, 1, "plane_z0"); }},
        {"plane_y0", [] { return fx::coord_plane(0, 2, "plane_y0"); }},
        {"plane_x0", [] { return fx::coord_plane(1, 2, "plane_x0"); }},
        {"ray_y", [] { return ray("ray_y", vec({0, 1})); }},
        {"ray_x", [] { return ray("ray_x", vec({1, 0})); }},
        {"space2", [] { return full_space(2); }},
        {"space3", [] { return full_space(3); }},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw std::out_of_range("unknown germ '" + name + "'");
    return it->second().renamed(name);
}

inline std::vector<std::string> germ_names()
{
    return {"V",       "hV",      "cone_z",  "cone_y",  "cusp",     "cubic_graph", "osc_graph", "pi_B",
            "a_m",     "b_m",     "x_axis2", "y_axis2", "x_axis3",  "y_axis3",     "z_axis",    "plane_z0",
            "plane_y0", "plane_x0", "ray_y", "ray_x",   "space2",   "space3"};
}

/// Named maps usable from configs; `n` selects the ambient dimension where it matters.
inline LipschitzMap map_by_name(const std::string& name, int n)
{
    if (name == "identity") return identity_map(n);
    if (name == "cube_z") return fx::cube_z();
    if (name == "oscillation") return fx::oscillation();
    if (name == "example21_map") return fx::example21_map();
    if (name == "shear") return n == 2 ? fx::shear2() : fx::shear3();
    if (name == "rotation") return n == 2 ? fx::rotation2() : fx::rotation3();
    if (name == "linear") return n == 3 ? fx::stretch3() : linear_map((Eigen::MatrixXd(2, 2) << 2, 0.3, 0.1, 0.7).finished(), "linear2");
    if (name == "radial_grow") return fx::radial_grow(n);
    if (name == "radial_angular") return fx::radial_angular(n);
    if (name.rfind("random_linear_", 0) == 0) return fx::random_linear(n, std::stoull(name.substr(14)));
    throw std::out_of_range("unknown map '" + name + "'");
}

inline std::vector<std::string> map_names()
{
    return {"identity", "cube_z", "oscillation", "example21_map", "shear", "rotation", "linear", "radial_grow",
            "radial_angular", "random_linear_<seed>"};
}

}  // namespace germlens
