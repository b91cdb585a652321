#include <catch_amalgamated.hpp>

#include "germlens/fixtures.hpp"
#include "germlens/lipschitz.hpp"

using namespace germlens;
using Catch::Approx;

TEST_CASE("constants of simple maps")
{
    const auto id = constants_estimate(identity_map(3), 0.5, 4000, 1);
    CHECK(id.K1 == Approx(1.0));
    CHECK(id.K2 == Approx(1.0));
    CHECK_FALSE(id.forward_unbounded);
    CHECK_FALSE(id.inverse_unbounded);

    const auto osc = constants_estimate(fx::oscillation(), 0.5, 20000, 2);
    CHECK(osc.K2 <= 1.0 + std::sqrt(2.0));
    CHECK(osc.K2 <= *fx::oscillation().K2 * (1 + 1e-9));
    CHECK(osc.K1 >= *fx::oscillation().K1 * (1 - 1e-9));
    CHECK_FALSE(osc.inverse_unbounded);
}

TEST_CASE("the cube map is flagged as not bi-Lipschitz")
{
    const auto c = constants_estimate(fx::cube_z(), 0.5, 6000, 3);
    CHECK(c.inverse_unbounded);
    CHECK_FALSE(c.forward_unbounded);
    LipschitzMap inv = fx::cube_z();
    std::swap(inv.forward, inv.inverse);
    CHECK(constants_estimate(inv, 0.5, 6000, 3).forward_unbounded);
}

TEST_CASE("composition constants")
{
    const auto h = fx::shear2(), g = fx::rotation2();
    const auto hg = compose(h, g);
    const auto c = constants_estimate(hg, 0.5, 10000, 4);
    CHECK(c.K2 <= *h.K2 * *g.K2 * (1 + 1e-9));
    CHECK(c.K1 >= *h.K1 * *g.K1 * (1 - 1e-9));
}

TEST_CASE("two-point extension")
{
    const BanachExtension e({vec({0.0}), vec({1.0})}, {0.0, 1.0}, 1.0);
    CHECK(e.alpha(vec({0.5})) == Approx(0.5));
    CHECK(e.beta(vec({0.5})) == Approx(0.5));
    CHECK(e.alpha(vec({1.0})) == 1.0);
    CHECK(e.beta(vec({3.0})) == Approx(-1.0));
}

TEST_CASE("zero data gives plus and minus distance")
{
    const Cloud A{vec({0.1, 0.0}), vec({-0.2, 0.3})};
    const BanachExtension e(A, {0.0, 0.0}, 1.0);
    const Point x = vec({0.4, 0.4});
    const double d = std::min((x - A[0]).norm(), (x - A[1]).norm());
    CHECK(e.alpha(x) == Approx(d));
    CHECK(e.beta(x) == Approx(-d));
}

TEST_CASE("extension rejects non-Lipschitz data")
{
    try {
        BanachExtension({vec({0.0}), vec({1.0})}, {0.0, 2.0}, 1.0);
        FAIL("expected a violation");
    } catch (const LipschitzViolation& v) {
        CHECK(v.quotient == Approx(2.0));
    }
}

TEST_CASE("extension properties on random anchor sets")
{
    Rng rng = make_rng(5, 0);
    for (int inst = 0; inst < 5; ++inst) {
        const int n = 2 + inst % 2;
        Cloud A;
        for (int i = 0; i < 30; ++i) A.push_back(random_in_ball(rng, n, 1.0));
        const double L = 1.5;
        std::vector<double> f;
        for (const auto& a : A) f.push_back(0.5 * a.norm() + 0.3 * std::sin(3 * a[0]));
        const BanachExtension e(A, f, L);
        for (std::size_t i = 0; i < A.size(); ++i) {
            CHECK(std::fabs(e.alpha(A[i]) - f[i]) <= 1e-12);
            CHECK(std::fabs(e.beta(A[i]) - f[i]) <= 1e-12);
        }
        for (int k = 0; k < 1000; ++k) {
            const Point x = random_in_ball(rng, n, 2.0), y = random_in_ball(rng, n, 2.0);
            const double d = (x - y).norm();
            CHECK(std::fabs(e.alpha(x) - e.alpha(y)) <= L * d * (1 + 1e-6));
            CHECK(std::fabs(e.convex(x, 0.3) - e.convex(y, 0.3)) <= L * d * (1 + 1e-6));
            CHECK(e.beta(x) <= e.alpha(x));
        }
    }
}

TEST_CASE("extension from a germ is exact on its anchors")
{
    const auto e = banach_extension(fx::cusp(), [](const Point& p) { return p[0]; }, 1.0, Schedule{}, 10, 1);
    for (std::size_t i = 0; i < e.anchors().size(); ++i) CHECK(e.alpha(e.anchors()[i]) == e.values()[i]);
}

TEST_CASE("cone extension")
{
    ConeBase b;
    b.h = identity_map(1);
    b.c = 1.0;
    b.R = 1.0;
    b.H = 1.0;
    b.samples = {vec({-1.0}), vec({0.0}), vec({1.0})};
    const auto id = cone_extension(b);
    CHECK((id(vec({0.3, 0.5})) - vec({0.3, 0.5})).norm() < 1e-15);
    CHECK(id(vec({0.0, 0.0})).norm() == 0.0);

    // doubling the first coordinate on [1,2] x {1}
    Eigen::MatrixXd M(2, 2);
    M << 2, 0, 0, 1;
    ConeBase d;
    d.h.name = "double_first";
    d.h.dim = 2;
    d.h.forward = [](const Point& x) { return vec({2 * x[0], x[1]}); };
    d.h.inverse = [](const Point& x) { return vec({x[0] / 2, x[1]}); };
    d.c = 2.0;
    d.R = std::sqrt(5.0);
    d.H = std::sqrt(17.0);
    for (int i = 0; i <= 20; ++i) d.samples.push_back(vec({1.0 + i / 20.0, 1.0}));
    const auto hs = cone_extension(d);
    CHECK(*hs.K2 == Approx(std::hypot(1.0 + std::sqrt(17.0) + 2 * std::sqrt(5.0), 2.0)));
    Rng rng = make_rng(2, 0);
    auto cone_point = [&] {
        const double t = uniform(rng, 0.0, 1.0), s = uniform(rng, 1.0, 2.0);
        return vec({t * s, t, t});
    };
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const Point p = cone_point(), q = cone_point();
        const Point hp = hs(p);
        CHECK((hp - vec({p[2] * 2 * p[0] / p[2], p[2] * p[1] / p[2], p[2]})).norm() < 1e-14);
        worst = std::max(worst, (hs(p) - hs(q)).norm() / (p - q).norm());
        CHECK((hs.inverse(hp) - p).norm() < 1e-12);
    }
    CHECK(worst <= *hs.K2);
    d.c = 1.5;
    CHECK_THROWS_AS(cone_extension(d), LipschitzViolation);
}

TEST_CASE("rotation cone extension is an isometry")
{
    ConeBase b;
    b.h = fx::rotation2(0.9);
    b.c = 1.0;
    b.R = 1.0;
    b.H = 1.0;
    for (int i = 0; i < 16; ++i) b.samples.push_back(vec({std::cos(i * 0.4), std::sin(i * 0.4)}));
    const auto hs = cone_extension(b);
    Rng rng = make_rng(3, 0);
    for (int k = 0; k < 1000; ++k) {
        auto pt = [&] {
            const double t = uniform(rng, 0.0, 1.0), a = uniform(rng, 0.0, 6.283);
            return vec({t * std::cos(a), t * std::sin(a), t});
        };
        const Point p = pt(), q = pt();
        CHECK((hs(p) - hs(q)).norm() == Approx((p - q).norm()).epsilon(1e-12));
    }
}

TEST_CASE("subdivision makes a subcomplex full")
{
    // a triangle with its boundary edges: the boundary is not full (the 2-face is spanned by its vertices)
    SimplicialComplex K{{vec({0, 0}), vec({1, 0}), vec({0, 1})}, {{0, 1, 2}}};
    const std::set<Simplex> boundary{{0}, {1}, {2}, {0, 1}, {1, 2}, {0, 2}};
    CHECK_FALSE(is_full_subcomplex(K, boundary));
    const auto sd = barycentric_subdivision(K);
    CHECK(sd.complex.vertices.size() == 7);
    CHECK(sd.complex.maximal.size() == 6);
    const auto sb = subdivide_subcomplex(sd, boundary);
    CHECK(is_full_subcomplex(sd.complex, sb));
}

TEST_CASE("simplicial extension interpolates vertex images")
{
    SimplicialComplex K{{vec({0, 0}), vec({1, 0}), vec({0, 1}), vec({1, 1})}, {{0, 1, 2}, {1, 2, 3}}};
    const Cloud img{vec({0, 0}), vec({2, 0}), vec({0, 3}), vec({2, 3})};
    const auto e = simplicial_extension(K, img);
    CHECK((*e(vec({0.5, 0.5})) - vec({1.0, 1.5})).norm() < 1e-12);
    CHECK((*e(vec({0.9, 0.8})) - vec({1.8, 2.4})).norm() < 1e-12);
    CHECK_FALSE(e(vec({2.0, 2.0})).has_value());
    const auto sd = barycentric_subdivision(K);
    Cloud img2;
    for (const auto& v : sd.complex.vertices) img2.push_back(vec({2 * v[0], 3 * v[1]}));
    const auto e2 = simplicial_extension(sd.complex, img2);
    CHECK((*e2(vec({0.3, 0.6})) - vec({0.6, 1.8})).norm() < 1e-12);
}
