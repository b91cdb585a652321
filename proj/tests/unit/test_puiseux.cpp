#include <catch_amalgamated.hpp>

#include "germlens/puiseux.hpp"

#include <random>

using namespace germlens;

namespace {

const PuiseuxNumber t = PuiseuxNumber::eps();

PuiseuxNumber random_px(std::mt19937_64& g, bool nonzero = false)
{
    std::uniform_int_distribution<int> nterms(nonzero ? 1 : 0, 3), num(0, 6), den(1, 3), cn(-9, 9), cd(1, 4);
    std::vector<PxTerm> terms;
    const int n = nterms(g);
    while (static_cast<int>(terms.size()) < n) {
        int c = cn(g);
        if (c == 0) continue;
        terms.push_back({Rational(num(g), den(g)), Rational(c, cd(g))});
    }
    auto x = PuiseuxNumber::from_terms(terms);
    return nonzero && x.empty() ? PuiseuxNumber(1) : x;
}

// agreement on every reliable term, with reliability at least the truncation order
bool agree(const PuiseuxNumber& a, const PuiseuxNumber& b)
{
    const auto d = a - b;
    return d.empty() && (!d.reliable() || *d.reliable() >= kDefaultTruncOrder);
}

}  // namespace

TEST_CASE("elementary arithmetic")
{
    CHECK((PuiseuxNumber(1) + t) + (PuiseuxNumber(1) - t) == PuiseuxNumber(2));
    CHECK(t * t == PuiseuxNumber::monomial(1, 2));
    CHECK(px_compare(PuiseuxNumber(1) + t, PuiseuxNumber(1)) == PxOrder::Greater);
    const auto inv = px_inv(PuiseuxNumber(1) - t);
    REQUIRE(inv.terms().size() == 8);
    for (int k = 0; k < 8; ++k) CHECK(inv.terms()[k] == PxTerm{k, 1});
    CHECK(inv.reliable() == Rational(8));
    CHECK_FALSE(inv.truncation_loss());
    CHECK(agree(inv * (PuiseuxNumber(1) - t), PuiseuxNumber(1)));
    CHECK_THROWS_AS(px_inv(PuiseuxNumber(0)), std::domain_error);
    CHECK(px_inv(PuiseuxNumber::monomial(2, Rational(1, 2))) == PuiseuxNumber::monomial(Rational(1, 2), Rational(-1, 2)));
}

TEST_CASE("truncation is tracked")
{
    const auto big = PuiseuxNumber::monomial(1, 5);
    const auto p = big * big;
    CHECK(p.empty());
    CHECK(p.reliable() == Rational(8));
    CHECK(px_compare(p, PuiseuxNumber(0)) == PxOrder::Indeterminate);
    // negative exponents expose the dropped tail
    const auto q = p * PuiseuxNumber::monomial(1, -3);
    CHECK(q.truncation_loss());
    CHECK(*q.reliable() == 5);
    CHECK_THROWS(px_less(p, PuiseuxNumber(0)));
}

TEST_CASE("field axioms on random triples")
{
    std::mt19937_64 g(20261016);
    int failures = 0, cases = 0;
    for (int i = 0; i < 1500; ++i) {
        const auto a = random_px(g), b = random_px(g), c = random_px(g);
        const auto u = random_px(g, true);
        ++cases;
        const bool ok = agree((a + b) + c, a + (b + c)) && agree((a * b) * c, a * (b * c)) && agree(a * (b + c), a * b + a * c) &&
                        agree(a + b, b + a) && agree(a * b, b * a) && agree(a + (-a), PuiseuxNumber(0)) &&
                        agree(u * px_inv(u), PuiseuxNumber(1)) && agree(px_inv(px_inv(u)), u) && agree(a * PuiseuxNumber(1), a);
        if (!ok) {
            ++failures;
            UNSCOPED_INFO(to_string(a) << " | " << to_string(b) << " | " << to_string(c) << " | " << to_string(u));
        }
    }
    CHECK(cases >= 1000);
    CHECK(failures == 0);
}

TEST_CASE("order compatibility on random triples")
{
    std::mt19937_64 g(7);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto x = random_px(g), y = random_px(g), z = random_px(g, true);
        if (px_compare(x, y) != PxOrder::Less || z.sign() <= 0) continue;
        ++checked;
        // products past the truncation order may become indeterminate, never reversed
        const auto o = px_compare(x * z, y * z);
        CHECK((o == PxOrder::Less || (o == PxOrder::Indeterminate && (y - x).valuation() + z.valuation() >= kDefaultTruncOrder)));
        CHECK(px_compare(x + z, y + z) == PxOrder::Less);
    }
    CHECK(checked > 200);
}

TEST_CASE("t is infinitesimal")
{
    for (const Rational& q : {Rational(1), Rational(1, 1000000), Rational(1, 1000000000), Rational(Integer(1), Integer("1000000000000000000000"))}) {
        CHECK(px_compare(PuiseuxNumber(0), t) == PxOrder::Less);
        CHECK(px_compare(t, PuiseuxNumber(q)) == PxOrder::Less);
    }
    for (int n : {1, 10, 1000, 1000000}) CHECK(px_compare(PuiseuxNumber(n) * t, PuiseuxNumber(1)) == PxOrder::Less);
    CHECK(px_compare(t, PuiseuxNumber::monomial(1000, Rational(3, 2))) == PxOrder::Greater);
}

TEST_CASE("parse and print round trip")
{
    const auto x = px_parse("3/2*t^(1/2) + t^2 - 5*t^(7/3)");
    REQUIRE(x.terms().size() == 3);
    CHECK(x.terms()[0] == PxTerm{Rational(1, 2), Rational(3, 2)});
    CHECK(x.terms()[2] == PxTerm{Rational(7, 3), Rational(-5)});
    CHECK(x.denominator() == 6);
    CHECK(to_string(x) == "3/2*t^(1/2) + t^2 - 5*t^(7/3)");
    CHECK(to_string(px_parse("-t + 2 - eps^(-1)")) == "-t^(-1) + 2 - t");
    CHECK(to_string(PuiseuxNumber(0)) == "0");
    CHECK(px_parse(to_string(px_inv(PuiseuxNumber(1) - t))) == px_inv(PuiseuxNumber(1) - t));
    CHECK_THROWS_AS(px_parse("t^"), std::invalid_argument);
    CHECK_THROWS_AS(px_parse("x + 1"), std::invalid_argument);
    CHECK_THROWS_AS(poly_parse("x^(1/2)"), std::invalid_argument);

    std::mt19937_64 g(3);
    for (int i = 0; i < 300; ++i) {
        const auto y = random_px(g) * random_px(g, true);
        CHECK(px_parse(to_string(y)) == y);
    }
}

TEST_CASE("max norm and set distance")
{
    CHECK(px_norm({t, t * t}).value == t);
    CHECK(px_norm({-t, PuiseuxNumber::monomial(-3, 2)}).value == t);
    const PxVector o{0, 0};
    CHECK(px_dist_set({o}, {o}).right_end == PuiseuxNumber(0));
    CHECK(px_dist_set({o}, {{t, t * t}}).right_end == t);
    const auto d = px_dist_set({o, {1, 0}}, {{PuiseuxNumber(1) + t, 0}});
    CHECK(d.right_end == t);
    CHECK(d.closed);
    CHECK(d.contains(t) == PxOrder::Equal);
    CHECK(d.contains(PuiseuxNumber(2) * t) == PxOrder::Greater);
}

TEST_CASE("cell volumes")
{
    CHECK(px_vol_cell(parse_cell("0", "x", "1", "t + x")).right_end == t);
    CHECK(px_vol_cell(parse_cell("0", "0", "1", "1")).right_end == PuiseuxNumber(1));
    CHECK(px_vol_cell(parse_cell("0", "0", "1", "x")).right_end == PuiseuxNumber(Rational(1, 2)));
    CHECK(px_vol_cell(parse_cell("0", "x^2", "1", "x")).right_end == PuiseuxNumber(Rational(1, 6)));
    CHECK(px_vol_cell(parse_cell("t", "0", "1", "x^3")).right_end == PuiseuxNumber(Rational(1, 4)) - PuiseuxNumber::monomial(Rational(1, 4), 4));
    CHECK_THROWS_AS(px_vol_cell(parse_cell("1", "0", "0", "1")), std::invalid_argument);
    CHECK_THROWS_AS(px_vol_cell(parse_cell("0", "1", "1", "x")), std::invalid_argument);
}

TEST_CASE("volume is additive under splitting")
{
    std::mt19937_64 g(11);
    for (int i = 0; i < 50; ++i) {
        const auto psi = PxPoly{random_px(g), random_px(g)};
        // phi = psi + 1 + x^2 stays above psi everywhere
        const auto phi = poly_add(psi, PxPoly{1, 0, 1});
        const CellForm2D whole{0, 1, psi, phi};
        const CellForm2D left{0, PuiseuxNumber(Rational(1, 3)) + t, psi, phi};
        const CellForm2D right{left.b1, 1, psi, phi};
        CHECK(agree(px_vol_cell(left).right_end + px_vol_cell(right).right_end, px_vol_cell(whole).right_end));
    }
}

TEST_CASE("strip scaling")
{
    const auto a = px_vol_scaling_check(parse_cell("0", "x", "1", "t + x"), 2);
    CHECK(a.vol_w == t);
    CHECK(a.vol_cw == PuiseuxNumber(2) * t);
    CHECK(a.ratio_exact);
    const auto b = px_vol_scaling_check(parse_cell("0", "-t^2", "1", "t^2"), 3);
    CHECK(b.ratio_exact);
    CHECK(b.vol_cw == PuiseuxNumber::monomial(6, 2));
    CHECK_THROWS_AS(px_vol_scaling_check(parse_cell("0", "0", "1", "x"), 2), std::invalid_argument);

    // diagonal: the max-norm tube of radius w around y = x is the vertical strip |y - x| <= 2w,
    // twice the graph strip of half-width w, inside the 2c envelope for c >= 1
    const auto w = PuiseuxNumber::monomial(1, 2);
    const auto graph = px_vol_cell({0, 1, PxPoly{-w, 1}, PxPoly{w, 1}}).right_end;
    const auto tube = px_vol_cell({0, 1, PxPoly{-PuiseuxNumber(2) * w, 1}, PxPoly{PuiseuxNumber(2) * w, 1}}).right_end;
    for (const Rational& c : {Rational(1), Rational(3, 2), Rational(4)}) {
        const auto s = px_vol_scaling_check({0, 1, PxPoly{-w, 1}, PxPoly{w, 1}}, c);
        CHECK(s.ratio_exact);
        CHECK(px_compare(tube, PuiseuxNumber(2 * c) * graph) != PxOrder::Greater);
    }
}

TEST_CASE("cube packings approach the triangle from below")
{
    const auto tri = parse_cell("0", "0", "1", "x");
    const Rational vol = px_vol_cell(tri).right_end.rational_value();
    Rational prev = 0;
    for (std::size_t k : {1, 3, 7, 15, 31, 63, 64}) {
        const auto p = cube_packing(tri, k);
        CHECK(p.squares.size() == k);
        CHECK(p.area <= vol);
        CHECK(p.area >= prev);
        prev = p.area;
    }
    const auto best = cube_packing(tri, 64);
    CHECK(vol - best.area <= Rational(1, 64));
    CHECK(best.area == Rational(63, 128) + Rational(1, 128 * 128));
    // squares are pairwise disjoint
    for (std::size_t i = 0; i < best.squares.size(); ++i)
        for (std::size_t j = i + 1; j < best.squares.size(); ++j) {
            const auto& a = best.squares[i];
            const auto& b = best.squares[j];
            const bool apart = a.x0 + a.side <= b.x0 || b.x0 + b.side <= a.x0 || a.y0 + a.side <= b.y0 || b.y0 + b.side <= a.y0;
            CHECK(apart);
        }

    const auto para = parse_cell("0", "x^2", "1", "x");
    const Rational pv = px_vol_cell(para).right_end.rational_value();
    // a curved boundary costs a layer of small squares at every scale: the gap decays like log2(k)/k
    Rational last_gap = pv;
    for (int e = 2; e <= 10; e += 2) {
        const std::size_t k = std::size_t{1} << e;
        const auto p = cube_packing(para, k);
        CHECK(p.area <= pv);
        CHECK(pv - p.area < last_gap);
        CHECK(pv - p.area <= Rational(e, static_cast<int>(k)));
        last_gap = pv - p.area;
    }
    CHECK_THROWS(cube_packing(parse_cell("0", "x", "1", "t + x"), 4));
}
