#include <catch_amalgamated.hpp>

#include "germlens/expr.hpp"

using namespace germlens;
using Catch::Approx;

TEST_CASE("precedence and associativity")
{
    CHECK(Expr::parse("1 + 2 * 3")("t", 0) == 7.0);
    CHECK(Expr::parse("(1 + 2) * 3")("t", 0) == 9.0);
    CHECK(Expr::parse("2 ^ 3 ^ 2")("t", 0) == 512.0);
    CHECK(Expr::parse("-2 ^ 2")("t", 0) == -4.0);
    CHECK(Expr::parse("8 / 4 / 2")("t", 0) == 1.0);
    CHECK(Expr::parse("1 - 2 - 3")("t", 0) == -4.0);
}

TEST_CASE("functions and variables")
{
    const auto e = Expr::parse("t * sin(ln(abs(t)))");
    CHECK(e("t", 0.3) == Approx(0.3 * std::sin(std::log(0.3))));
    CHECK(Expr::parse("pow(t, 1.5)")("t", 4.0) == Approx(8.0));
    CHECK(Expr::parse("exp(-1/t^2)")("t", 0.5) == Approx(std::exp(-4.0)));
    CHECK(Expr::parse("sqrt(t) + cos(0)")("t", 9.0) == Approx(4.0));
    Expr::Env env{{"m", 4.0}, {"t", 2.0}};
    CHECK(Expr::parse("m*t + pi").eval(env) == Approx(8.0 + std::numbers::pi));
}

TEST_CASE("parse errors")
{
    CHECK_THROWS_AS(Expr::parse("1 +"), ExprError);
    CHECK_THROWS_AS(Expr::parse("sin(1"), ExprError);
    CHECK_THROWS_AS(Expr::parse("foo(1)")("t", 0), ExprError);
    CHECK_THROWS_AS(Expr::parse("pow(1)"), ExprError);
    CHECK_THROWS_AS(Expr::parse("u + 1")("t", 0), ExprError);
    CHECK_THROWS_AS(Expr::parse("1 2"), ExprError);
}
