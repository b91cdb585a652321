#include <catch_amalgamated.hpp>

#include "germlens/germ.hpp"

using namespace germlens;
using Catch::Approx;

namespace {

Polynomial poly(int n, std::vector<std::vector<double>> rows) { return Polynomial::from_rows(n, rows); }

GermSet V()
{
    return semialgebraic("V", 3, {poly(3, {{1, 2, 0, 0}, {1, 0, 2, 0}, {-1, 0, 0, 6}})});
}

Point p3(double x, double y, double z)
{
    Point p(3);
    p << x, y, z;
    return p;
}

Point p2(double x, double y)
{
    Point p(2);
    p << x, y;
    return p;
}

// dense sweep over V's branch z -> (z^3, 0, z) followed by golden refinement
double sweep_distance_to_V_branch(const Point& x)
{
    auto f = [&](double z) { return (x - p3(z * z * z, 0, z)).norm(); };
    double best = 1e300, arg = 0;
    for (int i = 0; i <= 200000; ++i) {
        const double z = -0.3 + 0.6 * i / 200000;
        if (f(z) < best) {
            best = f(z);
            arg = z;
        }
    }
    double a = arg - 3e-6, b = arg + 3e-6;
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (b - a) / 3, m2 = b - (b - a) / 3;
        (f(m1) < f(m2) ? b : a) = (f(m1) < f(m2) ? m2 : m1);
    }
    return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("polynomial evaluation and gradient")
{
    const Polynomial f = poly(3, {{1, 2, 0, 0}, {1, 0, 2, 0}, {-1, 0, 0, 6}});
    const Point x = p3(0.5, -1.0, 2.0);
    CHECK(f(x) == Approx(0.25 + 1.0 - 64.0));
    const Point g = f.gradient(x);
    CHECK(g[0] == Approx(1.0));
    CHECK(g[1] == Approx(-2.0));
    CHECK(g[2] == Approx(-6.0 * 32.0));
    CHECK(f.degree() == 6);
    CHECK_THROWS(Polynomial::from_rows(2, {{1, 1}}));
}

TEST_CASE("V contains (t^3, 0, t)")
{
    const GermSet v = V();
    for (double t : {0.1, 0.01, 1e-3}) CHECK(v.contains(p3(t * t * t, 0, t)));
    CHECK_FALSE(v.contains(p3(0.01, 0, 0.01)));
}

TEST_CASE("shell samples satisfy membership and norm window")
{
    std::vector<GermSet> germs{
        V(),
        semialgebraic("cone", 3, {poly(3, {{1, 2, 0, 0}, {1, 0, 2, 0}, {-1, 0, 0, 2}})}),
        semialgebraic("cusp", 2, {poly(2, {{1, 0, 2}, {-1, 3, 0}})}),
        subspace("plane", (Eigen::MatrixXd(3, 2) << 1, 0, 0, 1, 0, 0).finished()),
        ray("ray", p2(1, 0)),
        parametric("halfline", 2, {[](double s) { return p2(s, 0); }}),
        sequence("seq", 2, [](std::int64_t m) { return p2(1.0 / m, 2.0 / m); }),
        full_space(3),
    };
    const Schedule sched;
    for (const auto& g : germs) {
        INFO(g.name());
        int nonempty = 0;
        for (double r : sched.radii()) {
            const Cloud c = g.sample(r, 40, 1);
            if (!c.empty()) ++nonempty;
            for (const auto& x : c) {
                REQUIRE(x.norm() >= 0.5 * r * (1 - 1e-12));
                REQUIRE(x.norm() <= r * (1 + 1e-12));
                REQUIRE(g.contains(x, 1e-10));
            }
        }
        CHECK(nonempty == sched.shells);
    }
}

TEST_CASE("sampling is a pure function of the seed")
{
    const GermSet v = V();
    const Cloud a = v.sample(0.01, 30, 5), b = v.sample(0.01, 30, 5), c = v.sample(0.01, 30, 6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(a[0] != c[0]);
}

TEST_CASE("V samples populate both branches")
{
    const Cloud c = V().sample(1e-3, 200, 2);
    int up = 0, down = 0;
    for (const auto& x : c) (x[2] > 0 ? up : down)++;
    CHECK(up > 40);
    CHECK(down > 40);
}

TEST_CASE("exact distances")
{
    const GermSet zaxis = subspace("z", (Eigen::MatrixXd(3, 1) << 0, 0, 1).finished());
    const auto d0 = distance_estimate(p3(0, 0, 0.5), zaxis);
    CHECK(d0.lower == 0.0);
    CHECK(d0.upper == Approx(0.0).margin(1e-15));
    const GermSet xaxis2 = subspace("x", (Eigen::MatrixXd(2, 1) << 1, 0).finished());
    const auto d1 = distance_estimate(p2(1, 1), xaxis2);
    CHECK(d1.lower == Approx(1.0));
    CHECK(d1.upper == Approx(1.0));
    CHECK(d1.exact);
}

TEST_CASE("distance to V near its branch against a parametric sweep")
{
    const GermSet v = V();
    for (double t : {0.05, 0.1}) {
        for (double s : {1e-4, 1e-3}) {
            const Point x = p3(t * t * t + s, 0, t);
            const double oracle = sweep_distance_to_V_branch(x);
            const auto d = distance_estimate(x, v, 20000, 3);
            INFO("t=" << t << " s=" << s);
            CHECK(d.lower == 0.0);
            CHECK(d.upper >= oracle * (1 - 1e-9));
            CHECK(d.upper == Approx(oracle).epsilon(1e-3));
            CHECK(d.upper == Approx(s).epsilon(0.05));
        }
    }
}

TEST_CASE("distance estimate is monotone in the budget")
{
    const GermSet v = V();
    const Point x = p3(0.002, 0.001, 0.08);
    double prev_upper = 1e300, prev_lower = -1;
    for (long b : {16L, 64L, 256L, 1024L, 4096L}) {
        const auto d = distance_estimate(x, v, b, 9);
        CHECK(d.upper <= prev_upper);
        CHECK(d.lower >= prev_lower);
        prev_upper = d.upper;
        prev_lower = d.lower;
    }
    CHECK_THROWS(distance_estimate(x, v, 4));
}

TEST_CASE("parametric search approaches the true distance")
{
    // y = x^3 graph; distance from (s, s^3 + h) is about h for small s, h
    const GermSet g = parametric("cubic", 2, {[](double s) { return p2(s, s * s * s); }, [](double s) { return p2(-s, -s * s * s); }});
    const Point x = p2(0.05, 0.05 * 0.05 * 0.05 + 1e-6);
    const auto d = distance_estimate(x, g, 8000, 1);
    const double exact_ish = 1e-6 / std::sqrt(1 + 9 * std::pow(0.05, 4));
    CHECK(d.upper == Approx(exact_ish).epsilon(1e-3));
    double prev = 1e300;
    for (long b : {16L, 100L, 1000L, 8000L}) {
        const auto e = distance_estimate(x, g, b, 1);
        CHECK(e.upper <= prev);
        prev = e.upper;
    }
}

TEST_CASE("sequence oracle is exact")
{
    const GermSet s = sequence("geo", 2, [](std::int64_t m) { return p2(std::pow(0.25, m), 0); });
    const auto d = distance_estimate(p2(0.1, 0), s);
    CHECK(d.exact);
    CHECK(d.upper == Approx(0.1 - 0.0625));
    // shells between sequence points are empty
    CHECK(s.sample(0.2, 10, 1).empty());
    CHECK(s.sample(0.25, 10, 1).size() == 10);
}

TEST_CASE("cone oracle")
{
    const GermSet c = cone("axis", {p3(0, 0, 1), p3(0, 0, -1)}, 0.05);
    CHECK(distance_estimate(p3(0.3, 0.4, 1.0), c).upper == Approx(0.5));
    CHECK(c.contains(p3(0.01, 0, 1)));
    CHECK_FALSE(c.contains(p3(0.2, 0, 1)));
}

TEST_CASE("mapped germ samples and certified bounds")
{
    Eigen::MatrixXd M(2, 2);
    M << 2, 1, 0, 1;
    const LipschitzMap h = linear_map(M, "shear");
    const GermSet base = subspace("x", (Eigen::MatrixXd(2, 1) << 1, 0).finished());
    const GermSet img = mapped(base, h);
    for (const auto& y : img.sample(0.01, 50, 2)) {
        REQUIRE(y.norm() <= 0.01 * (1 + 1e-12));
        REQUIRE(y.norm() >= 0.005 * (1 - 1e-12));
        REQUIRE(img.contains(y));
    }
    const Point y = p2(0.01, 0.004);
    const auto d = distance_estimate(y, img, 4000, 1);
    // image is the x-axis again, so the true distance is 0.004
    CHECK(d.lower <= 0.004 + 1e-12);
    CHECK(d.upper == Approx(0.004).epsilon(1e-6));
}

TEST_CASE("empty intersections are rejected at construction")
{
    CHECK_THROWS(semialgebraic("origin", 2, {poly(2, {{1, 1, 0}}), poly(2, {{1, 0, 1}})}));
}
