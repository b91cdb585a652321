#include <catch_amalgamated.hpp>

#include "germlens/directions.hpp"
#include "germlens/fixtures.hpp"

using namespace germlens;

namespace {

DirectionParams params(std::uint64_t seed = 7)
{
    DirectionParams p;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("V has two limit directions")
{
    const auto D = direction_set_estimate(fx::V(), params());
    CHECK(D.dim == 0);
    CHECK(D.clusters == 2);
    for (const auto& p : D.estimate_points()) CHECK(std::fabs(std::fabs(p[2]) - 1.0) < 0.05);
}

TEST_CASE("the cone image of V is one-dimensional")
{
    const auto D = direction_set_estimate(fx::cone_z(), params());
    CHECK(D.dim == 1);
    CHECK(D.confidence >= 0.8);
}

TEST_CASE("oscillating graph has an arc of directions")
{
    DirectionParams p = params();
    p.schedule = Schedule{0.1, 0.5, 16};
    const auto D = direction_set_estimate(fx::oscillation_graph(), p);
    CHECK(D.dim == 1);
    double max_angle = 0.0;
    for (const auto& q : D.points) max_angle = std::max(max_angle, std::atan2(std::fabs(q[1]), std::fabs(q[0])));
    CHECK(max_angle > 0.6);
    CHECK(max_angle < std::numbers::pi / 4 + 0.05);
}

TEST_CASE("full space has the whole sphere")
{
    const auto D = direction_set_estimate(full_space(3), params());
    CHECK(D.dim == 2);
}

TEST_CASE("lines, planes and cusp")
{
    CHECK(direction_set_estimate(fx::axis(3, 2, "z"), params()).dim == 0);
    CHECK(direction_set_estimate(fx::coord_plane(0, 1, "p"), params()).dim == 1);
    const auto D = direction_set_estimate(fx::cusp(), params());
    CHECK(D.dim == 0);
    CHECK(D.clusters == 1);
}

TEST_CASE("direction intersections")
{
    CHECK(direction_intersection_dim(fx::axis(2, 0, "x"), fx::axis(2, 1, "y"), params()).dim == -1);
    CHECK(direction_intersection_dim(fx::coord_plane(0, 1, "p"), fx::cone_y(), params()).dim == 0);
    CHECK(direction_intersection_dim(fx::coord_plane(0, 1, "p"), fx::coord_plane(0, 2, "q"), params()).dim == 0);
    CHECK(direction_intersection_dim(fx::coord_plane(0, 1, "p"), full_space(3), params()).dim == 1);
    CHECK(direction_intersection_dim(full_space(3), fx::cone_z(), params()).dim == 1);
}

TEST_CASE("intersections refine with the shells")
{
    // the cusp cluster only shrinks with the radius, not with the thickness
    const auto c = direction_intersection_dim(fx::cusp(), fx::axis(2, 0, "x"), params());
    CHECK(c.dim == 0);
    CHECK(c.confidence >= kConfidenceGate);
    const auto o = direction_intersection_dim(fx::oscillation_graph(), fx::oscillation_graph(), params());
    CHECK(o.dim == 1);
    CHECK(o.unstable);
}

TEST_CASE("shrink exponent of the cusp cluster")
{
    const auto D = direction_set_estimate(fx::cusp(), params());
    const double beta = detail::shrink_exponent(D, {vec({1.0, 0.0})}, 0);
    CHECK(beta == Catch::Approx(0.5).margin(0.1));
    CHECK(D.confidence >= kConfidenceGate);
}

TEST_CASE("direction estimate is deterministic")
{
    const auto a = direction_set_estimate(fx::cone_z(), params(3));
    const auto b = direction_set_estimate(fx::cone_z(), params(3));
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK((a.points[i] - b.points[i]).norm() == 0.0);
}

TEST_CASE("tangent cone of V is two rays")
{
    const auto D = direction_set_estimate(fx::V(), params());
    const auto LD = tangent_cone(D);
    CHECK(LD.contains(vec({0, 0, 0.3})));
    CHECK(LD.contains(vec({0, 0, -0.3})));
    CHECK_FALSE(LD.contains(vec({0.3, 0, 0})));
}

TEST_CASE("empty direction sample")
{
    const auto D = direction_sample_from_cloud({}, 0.05);
    CHECK(D.empty());
    CHECK(D.dim == -1);
}
