#pragma once

#include "germlens/linalg.hpp"

#include "json.hpp"

#include <cmath>

namespace germlens {

using nlohmann::json;

inline json point_json(const Point& p)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
    return a;
}

inline Point json_point(const json& j)
{
    if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a nonempty array of numbers");
    Point p(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return p;
}

/// Non-finite values become null so reports stay valid JSON.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace germlens
