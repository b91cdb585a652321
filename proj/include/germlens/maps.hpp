#pragma once

#include "germlens/linalg.hpp"

#include <functional>
#include <optional>
#include <string>

namespace germlens {

using PointMap = std::function<Point(const Point&)>;

/// Map germ fixing 0, with optional inverse and claimed constants K1 <= K2.
/// Plain homeomorphisms carry no constants.
struct LipschitzMap {
    std::string name;
    int dim = 0;
    PointMap forward;
    PointMap inverse;
    std::optional<double> K1;
    std::optional<double> K2;
    std::string provenance = "none";  // analytic | estimated | none

    Point operator()(const Point& x) const { return forward(x); }
    bool has_inverse() const { return static_cast<bool>(inverse); }
    bool bi_lipschitz() const { return K1.has_value() && K2.has_value(); }
};

inline LipschitzMap identity_map(int n)
{
    return {"identity", n, [](const Point& x) { return x; }, [](const Point& x) { return x; }, 1.0, 1.0, "analytic"};
}

/// x -> M x, constants are the extreme singular values.
inline LipschitzMap linear_map(const Eigen::MatrixXd& M, std::string name = "linear")
{
    if (M.rows() != M.cols()) throw std::invalid_argument("linear map must be square");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& s = svd.singularValues();
    const double smin = s[s.size() - 1];
    if (!(smin > 0.0)) throw std::invalid_argument("linear map is singular");
    const Eigen::MatrixXd Minv = M.inverse();
    LipschitzMap h;
    h.name = std::move(name);
    h.dim = static_cast<int>(M.rows());
    h.forward = [M](const Point& x) -> Point { return M * x; };
    h.inverse = [Minv](const Point& x) -> Point { return Minv * x; };
    h.K1 = smin;
    h.K2 = s[0];
    h.provenance = "analytic";
    return h;
}

/// h o g; constants multiply.
inline LipschitzMap compose(const LipschitzMap& h, const LipschitzMap& g)
{
    if (h.dim != g.dim) throw std::invalid_argument("cannot compose maps of different dimension");
    LipschitzMap c;
    c.name = h.name + "*" + g.name;
    c.dim = h.dim;
    c.forward = [h, g](const Point& x) { return h.forward(g.forward(x)); };
    if (h.has_inverse() && g.has_inverse()) c.inverse = [h, g](const Point& y) { return g.inverse(h.inverse(y)); };
    if (h.bi_lipschitz() && g.bi_lipschitz()) {
        c.K1 = *h.K1 * *g.K1;
        c.K2 = *h.K2 * *g.K2;
        c.provenance = (h.provenance == "analytic" && g.provenance == "analytic") ? "analytic" : "estimated";
    }
    return c;
}

}  // namespace germlens
