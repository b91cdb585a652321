#include <catch_amalgamated.hpp>

#include "germlens/linalg.hpp"

using namespace germlens;
using Catch::Approx;

TEST_CASE("rng streams are reproducible and distinct")
{
    Rng a = make_rng(42, 1), b = make_rng(42, 1), c = make_rng(42, 2);
    const auto x = a(), y = b(), z = c();
    CHECK(x == y);
    CHECK(x != z);
}

TEST_CASE("uniform01 stays in [0,1) with the right mean")
{
    Rng rng = make_rng(7);
    double acc = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = uniform01(rng);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        acc += u;
    }
    CHECK(acc / 100000 == Approx(0.5).margin(0.005));
}

TEST_CASE("shell sampler respects the shell")
{
    Rng rng = make_rng(3);
    for (int n = 1; n <= 4; ++n)
        for (int i = 0; i < 2000; ++i) {
            const double r = random_in_shell(rng, n, 0.2).norm();
            REQUIRE(r >= 0.1 - 1e-15);
            REQUIRE(r <= 0.2 + 1e-15);
        }
}

TEST_CASE("sphere and ball measures")
{
    CHECK(surface_area_unit_sphere(2) == Approx(2 * std::numbers::pi));
    CHECK(surface_area_unit_sphere(3) == Approx(4 * std::numbers::pi));
    CHECK(ball_volume(3, 2.0) == Approx(4.0 / 3.0 * std::numbers::pi * 8.0));
    // S^3 cap of angle pi is the whole sphere 2 pi^2
    CHECK(cap_area(4, std::numbers::pi) == Approx(2 * std::numbers::pi * std::numbers::pi).epsilon(1e-9));
    CHECK(cap_area(3, std::numbers::pi / 2) == Approx(2 * std::numbers::pi));
}

TEST_CASE("cap sampler stays inside the cap")
{
    Rng rng = make_rng(11);
    for (int n = 2; n <= 4; ++n) {
        Point d = Point::Zero(n);
        d[0] = 1.0;
        for (int i = 0; i < 3000; ++i) {
            const Point v = random_in_cap(rng, d, 0.3);
            REQUIRE(v.norm() == Approx(1.0).epsilon(1e-12));
            REQUIRE(angle_between(v, d) <= 0.3 + 1e-12);
        }
    }
}

TEST_CASE("cap sampler is uniform on S^2 caps")
{
    // P(angle <= beta/2 | angle <= beta) = (1 - cos(beta/2)) / (1 - cos beta)
    Rng rng = make_rng(5);
    Point d(3);
    d << 0, 0, 1;
    const double beta = 0.8;
    int inner = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i)
        if (angle_between(random_in_cap(rng, d, beta), d) <= beta / 2) ++inner;
    const double expect = (1 - std::cos(beta / 2)) / (1 - std::cos(beta));
    CHECK(static_cast<double>(inner) / N == Approx(expect).margin(0.005));
}

TEST_CASE("angle_between is accurate for tiny and antipodal angles")
{
    Point a(2), b(2);
    a << 1, 0;
    b << std::cos(1e-9), std::sin(1e-9);
    CHECK(angle_between(a, b) == Approx(1e-9).epsilon(1e-6));
    CHECK(angle_between(a, -a) == Approx(std::numbers::pi));
}

TEST_CASE("hash grid neighbour query matches brute force")
{
    Rng rng = make_rng(9);
    Cloud pts;
    for (int i = 0; i < 500; ++i) pts.push_back(random_in_ball(rng, 3, 1.0));
    const HashGrid grid(pts, 0.2);
    for (int q = 0; q < 50; ++q) {
        const Point c = random_in_ball(rng, 3, 1.0);
        std::vector<std::size_t> got;
        grid.for_each_within(c, 0.2, [&](std::size_t i) { got.push_back(i); });
        std::sort(got.begin(), got.end());
        std::vector<std::size_t> want;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((pts[i] - c).norm() <= 0.2) want.push_back(i);
        REQUIRE(got == want);
    }
}

TEST_CASE("hausdorff distance of shifted clouds")
{
    Cloud a, b;
    for (int i = 0; i <= 10; ++i) {
        Point p(2), q(2);
        p << i * 0.1, 0.0;
        q << i * 0.1, 0.03;
        a.push_back(p);
        b.push_back(q);
    }
    CHECK(hausdorff(a, b) == Approx(0.03));
    b.push_back(Point::Constant(2, 5.0));
    CHECK(directed_hausdorff(a, b) == Approx(0.03));
    CHECK(hausdorff(a, b) > 4.0);
}
