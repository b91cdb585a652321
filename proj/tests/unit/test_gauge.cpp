#include <catch_amalgamated.hpp>

#include "germlens/gauge.hpp"

using namespace germlens;
using Catch::Approx;

TEST_CASE("monomial evaluation")
{
    const Gauge g = Gauge::monomial(1.0, 2.0);
    CHECK(g(0.1) == Approx(0.01));
    CHECK(g(0.0) == 0.0);
}

TEST_CASE("odd extension")
{
    const Gauge g = Gauge::monomial(3.0, 0.5);
    for (double t : {1e-6, 1e-3, 0.2, 0.9}) CHECK(g(-t) == -g(t));
}

TEST_CASE("domain error beyond t_max")
{
    const Gauge g = Gauge::monomial(1.0, 1.0, 0.5);
    CHECK_THROWS_AS(g(0.6), std::domain_error);
    CHECK_THROWS_AS(g(-0.6), std::domain_error);
    CHECK_NOTHROW(g(0.5));
}

TEST_CASE("comparison")
{
    const Gauge sq = Gauge::monomial(1.0, 2.0), lin = Gauge::monomial(1.0, 1.0);
    CHECK(gauge_compare(sq, lin).order == GaugeOrder::LessEq);
    CHECK(gauge_compare(lin, sq).order == GaugeOrder::GreaterEq);
    CHECK(gauge_compare(lin, lin).order == GaugeOrder::LessEq);
    // 4t^2 crosses t at 1/4
    const auto c = gauge_compare(Gauge::monomial(4.0, 2.0), lin);
    CHECK(c.order == GaugeOrder::Incomparable);
    REQUIRE(c.witness);
    CHECK(*c.witness > 0.25);
}

TEST_CASE("scaling keeps monomials monomial")
{
    const Gauge g = Gauge::monomial(2.0, 1.5);
    const Gauge s = Gauge::scaled(g, 3.0, 0.5);
    REQUIRE(s.is_monomial());
    for (double t : {0.01, 0.1, 0.4}) CHECK(s(t) == Approx(3.0 * g(t / 0.5)));
    CHECK(s.t_max() == Approx(0.5));
}

TEST_CASE("tabulated gauge interpolates and is monotone")
{
    const Gauge g = Gauge::tabulated({0.1, 0.2, 0.4}, {0.01, 0.05, 0.06});
    CHECK(g(0.05) == Approx(0.005));
    CHECK(g(0.15) == Approx(0.03));
    CHECK(g(0.4) == Approx(0.06));
    CHECK_FALSE(gauge_monotonicity_violation(g, log_grid(1e-4, 0.4, 300)));
    CHECK_THROWS(Gauge::tabulated({0.1, 0.2}, {0.5, 0.4}));
    const Gauge s = Gauge::scaled(g, 2.0, 2.0);
    CHECK(s(0.3) == Approx(2.0 * g(0.15)));
    CHECK(s.t_max() == Approx(0.8));
}

TEST_CASE("monotone on dense grids")
{
    for (double alpha : {0.05, 0.5, 1.0, 3.0, 8.0}) {
        const Gauge g = Gauge::monomial(1.7, alpha);
        CHECK_FALSE(gauge_monotonicity_violation(g, log_grid(1e-6, 1.0, 1000)));
    }
}
