#include <catch_amalgamated.hpp>

#include "germlens/fixtures.hpp"

using namespace germlens;
using Catch::Approx;

namespace {

// brute-force distance to a point cloud sampled densely along a curve
double brute(const std::function<Point(double)>& c, double lo, double hi, const Point& x)
{
    double best = 1e300;
    for (int i = 0; i <= 400000; ++i) best = std::min(best, (c(lo + (hi - lo) * i / 400000.0) - x).norm());
    return best;
}

}  // namespace

TEST_CASE("catalog germs contain their samples")
{
    for (const auto& f : catalog())
        for (const auto& [role, g] : f.germs) {
            for (double r : {0.05, 0.01}) {
                const auto pts = g.sample(r, 20, 5);
                for (const auto& p : pts) {
                    INFO(f.name << "/" << role << " r=" << r);
                    CHECK(g.contains(p, 1e-8));
                    CHECK(p.norm() <= r * (1 + 1e-9));
                }
            }
        }
}

TEST_CASE("numeric oracles agree with brute force")
{
    const Point x = vec({0.03, -0.01});
    const double dc = (x - *fx::cusp().foot(x)).norm();
    CHECK(dc == Approx(brute([](double u) { return vec({u * u, u * u * u}); }, -1, 1, x)).epsilon(1e-4));
    const double dg = (x - *fx::cubic_graph().foot(x)).norm();
    CHECK(dg == Approx(brute([](double u) { return vec({u, u * u * u}); }, -1, 1, x)).epsilon(1e-4));
    const Point y = vec({0.02, 0.01, 0.05});
    const double rho = std::hypot(0.02, 0.01);
    const double dv = (y - *fx::V().foot(y)).norm();
    CHECK(dv == Approx(brute([](double w) { return vec({std::fabs(w * w * w), w}); }, -1, 1, vec({rho, 0.05})))
                    .epsilon(1e-4));
}

TEST_CASE("cone oracle is exact")
{
    const Point x = vec({0.03, 0.04, 0.01});
    const Point f = *fx::cone_z().foot(x);
    CHECK(fx::cone_z().contains(f));
    // distance to the cone is |rho - |z|| / sqrt 2
    CHECK((x - f).norm() == Approx((0.05 - 0.01) / std::sqrt(2.0)).epsilon(1e-12));
    const Point y = vec({0.03, 0.01, 0.04});
    CHECK((y - *fx::cone_y().foot(y)).norm() == Approx((0.05 - 0.01) / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("maps invert and respect their constants")
{
    Rng rng = make_rng(11, 0);
    for (const auto& name : {"identity", "oscillation", "example21_map", "shear", "rotation", "linear", "radial_grow",
                             "radial_angular", "random_linear_4"}) {
        for (int n : {2, 3}) {
            if ((std::string(name) == "oscillation" || std::string(name) == "example21_map") && n == 3) continue;
            const auto h = map_by_name(name, n);
            REQUIRE(h.dim == n);
            for (int k = 0; k < 200; ++k) {
                const Point x = random_in_ball(rng, n, 0.5), y = random_in_ball(rng, n, 0.5);
                INFO(name << " n=" << n);
                CHECK((h.inverse(h(x)) - x).norm() < 1e-9);
                const double q = (h(x) - h(y)).norm() / (x - y).norm();
                CHECK(q <= *h.K2 * (1 + 1e-9));
                CHECK(q >= *h.K1 * (1 - 1e-9));
            }
        }
    }
}

TEST_CASE("oscillation constants")
{
    const auto h = fx::oscillation();
    CHECK(*h.K2 == Approx((std::sqrt(6.0) + std::sqrt(2.0)) / 2));
    CHECK(*h.K1 * *h.K2 == Approx(1.0));
}

TEST_CASE("example21 map sends a_m to b_m")
{
    const auto h = fx::example21_map();
    const auto A = fx::seq_a(), B = fx::seq_b();
    for (std::int64_t m = 1; m <= 20; ++m) {
        const Point a = vec({1.0 / m, fx::partial_e(m) / m});
        const Point b = vec({0.0, fx::partial_e(m) / m});
        CHECK((h(a) - b).norm() < 1e-12);
        CHECK(A.contains(a));
        CHECK(B.contains(b));
    }
    CHECK(fixture("example21").invariant_excluded);
}

TEST_CASE("radial angular constants bracket numeric quotients")
{
    const auto h = fx::radial_angular(2);
    CHECK(*h.K1 > 0.9);
    CHECK(*h.K2 < 2.2);
}

TEST_CASE("lookup")
{
    for (const auto& n : germ_names()) CHECK(germ_by_name(n).name() == n);
    CHECK_THROWS(germ_by_name("nope"));
    CHECK_THROWS(fixture("nope"));
    CHECK(fixture("example11").truth_of("dim_D_hA").value == 1);
    CHECK_FALSE(fixture("example11").flags.bi_lipschitz);
}
