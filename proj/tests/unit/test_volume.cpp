#include <catch_amalgamated.hpp>

#include "germlens/fixtures.hpp"
#include "germlens/volume.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

using namespace germlens;
using boost::math::quadrature::gauss_kronrod;

namespace {

const Gauge kLinear = Gauge::monomial(1.0, 1.0);

// spherical-shell quadrature: the band |z| <= R^2 on the sphere of radius R has area 4 pi R^3
double plane_oracle(double eps)
{
    return gauss_kronrod<double, 31>::integrate([](double R) { return 4 * M_PI * R * R * R; }, 0.0, eps);
}

// the two caps sin(phi) <= R around the z-axis have area 4 pi R^2 (1 - sqrt(1 - R^2))
double line_oracle(double eps)
{
    return gauss_kronrod<double, 31>::integrate(
        [](double R) { return 4 * M_PI * R * R * (R * R / (1.0 + std::sqrt(1.0 - R * R))); }, 0.0, eps);
}

VolumeParams vparams(long n, std::uint64_t seed = 1)
{
    VolumeParams p;
    p.samples = n;
    p.pilot = std::min(n, 50000L);
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("quadrature oracles match closed forms")
{
    CHECK(plane_oracle(0.1) == Catch::Approx(M_PI * 1e-4).epsilon(1e-9));
    CHECK(line_oracle(0.01) == Catch::Approx(2 * M_PI * 1e-10 / 5).epsilon(1e-3));
}

TEST_CASE("full space fills the ball")
{
    const auto v = vol_st_ball(full_space(3), kLinear, 0.1, vparams(20000));
    CHECK(v.value == Catch::Approx(ball_volume(3, 0.1)));
}

TEST_CASE("plane and line volumes agree with quadrature within 3 sigma")
{
    for (double eps : {0.1, 0.01}) {
        const auto pl = vol_st_ball(fx::coord_plane(0, 1, "p"), kLinear, eps, vparams(200000));
        INFO("plane eps=" << eps << " " << pl.value << " +- " << pl.ci_halfwidth << " oracle " << plane_oracle(eps));
        CHECK(std::fabs(pl.value - plane_oracle(eps)) <= 1.5 * pl.ci_halfwidth);
        const auto ln = vol_st_ball(fx::axis(3, 2, "z"), kLinear, eps, vparams(200000));
        INFO("line eps=" << eps << " " << ln.value << " +- " << ln.ci_halfwidth << " oracle " << line_oracle(eps) << " "
                         << ln.estimator);
        CHECK(std::fabs(ln.value - line_oracle(eps)) <= 1.5 * ln.ci_halfwidth);
        CHECK(ln.value <= ball_volume(3, eps));
    }
}

TEST_CASE("thin tubes switch to importance sampling")
{
    const auto ln = vol_st_ball(fx::axis(3, 2, "z"), kLinear, 1e-3, vparams(200000));
    CHECK(ln.estimator == "importance");
    CHECK(ln.ci_halfwidth < 0.1 * ln.value);
    CHECK(std::fabs(ln.value - line_oracle(1e-3)) <= 1.5 * ln.ci_halfwidth);
}

TEST_CASE("independent seeds agree and CI shrinks")
{
    const GermSet A = fx::cone_z();
    const auto a = vol_st_ball(A, kLinear, 0.05, vparams(40000, 1));
    const auto b = vol_st_ball(A, kLinear, 0.05, vparams(40000, 2));
    CHECK(std::fabs(a.value - b.value) <= 1.5 * std::hypot(a.ci_halfwidth, b.ci_halfwidth));
    const auto c = vol_st_ball(A, kLinear, 0.05, vparams(160000, 3));
    CHECK(c.ci_halfwidth < 0.65 * a.ci_halfwidth);
}

TEST_CASE("line versus plane decays")
{
    const std::vector<double> eps{1e-1, std::pow(10, -1.5), 1e-2, std::pow(10, -2.5), 1e-3};
    const auto r = ratio_curve(fx::axis(3, 2, "z"), fx::coord_plane(0, 1, "p"), kLinear, eps, vparams(100000));
    CHECK(r.verdict == RatioVerdict::DecaysToZero);
    CHECK(r.slope == Catch::Approx(1.0).margin(0.2));
    const auto inv = ratio_curve(fx::coord_plane(0, 1, "p"), fx::axis(3, 2, "z"), kLinear, eps, vparams(100000));
    CHECK(inv.verdict == RatioVerdict::Increases);
    const auto sq = ratio_curve(fx::axis(3, 2, "z"), fx::coord_plane(0, 1, "p"), Gauge::monomial(1, 0.5), eps, vparams(100000));
    CHECK(sq.verdict == RatioVerdict::DecaysToZero);
}

TEST_CASE("self ratio and c-scaling")
{
    const std::vector<double> eps{1e-1, 1e-2};
    const auto same = ratio_curve(fx::cone_z(), fx::cone_z(), kLinear, eps, vparams(20000));
    for (const auto& p : same.points) CHECK(p.ratio == Catch::Approx(1.0).epsilon(0.1));
    CHECK(same.verdict == RatioVerdict::Comparable);
    const auto one = ctimes_check(fx::axis(3, 2, "z"), kLinear, 1.0, eps, vparams(20000));
    for (const auto& p : one.points) CHECK(p.ratio == Catch::Approx(1.0).epsilon(0.1));
    const auto two = ctimes_check(fx::axis(3, 2, "z"), kLinear, 2.0, {1e-1, 1e-2, 1e-3}, vparams(200000));
    CHECK(two.verdict == RatioVerdict::Comparable);
    for (const auto& p : two.points) CHECK(p.ratio == Catch::Approx(4.0).epsilon(0.15));
}

TEST_CASE("dimension inequality and invariants")
{
    DirectionParams dp;
    dp.seed = 4;
    const auto di = dim_inequality_check(identity_map(3), fx::V(), dp);
    CHECK(di.dim_E == 0);
    CHECK(di.dim_F == 0);
    CHECK(di.holds);
    const auto sh = invariant_check(fx::shear2(), fx::axis(2, 0, "x"), fx::axis(2, 1, "y"), dp);
    CHECK(sh.dim_before == -1);
    CHECK(sh.dim_after == -1);
    CHECK(sh.equal);
    // not definable: the image of a line spreads over a whole arc of directions
    const auto osc = dim_inequality_check(fx::oscillation(), fx::axis(2, 0, "x"), dp);
    CHECK(osc.dim_E == 0);
    CHECK(osc.dim_F == 1);
    CHECK_FALSE(osc.holds);
    const auto hA = direction_set_estimate(mapped(fx::axis(2, 0, "x"), fx::oscillation()), dp);
    CHECK(hA.dim == 1);
}

TEST_CASE("direction dimension never exceeds sample dimension")
{
    DirectionParams dp;
    for (const GermSet& A : {fx::V(), fx::cone_z(), fx::coord_plane(0, 1, "p"), fx::axis(3, 2, "z"), fx::cusp()}) {
        INFO(A.name());
        const int dA = sample_dimension(A, 0.05, 400, 1);
        CHECK(direction_set_estimate(A, dp).dim + 1 <= dA);
    }
}
