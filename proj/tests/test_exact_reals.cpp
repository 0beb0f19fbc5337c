#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "disint/errors.hpp"
#include "disint/interval.hpp"
#include "disint/located.hpp"
#include "disint/rational.hpp"
#include "disint/trig.hpp"

using namespace disint;

TEST_CASE("rational basics") {
    Rational a(6, 4);
    CHECK(a.num() == 3);
    CHECK(a.den() == 2);
    CHECK(a.str() == "3/2");
    CHECK(Rational(-6, -4) == Rational(3, 2));
    CHECK(Rational(BigInt(0), BigInt(5)).str() == "0");
    CHECK_THROWS_AS(Rational(1, 0), ContractError);

    CHECK(Rational::parse("7/3") == Rational(7, 3));
    CHECK(Rational::parse("-2") == Rational(-2));
    CHECK(Rational::parse(Rational(355, 113).str()) == Rational(355, 113));
    CHECK_THROWS_AS(Rational::parse("x/y"), ContractError);

    CHECK(Rational::pow2(-3) == Rational(1, 8));
    CHECK(Rational::pow2(4) == Rational(16));
    CHECK(Rational(7, 2).floor() == 3);
    CHECK(Rational(7, 2).ceil() == 4);
    CHECK(Rational(-7, 2).floor() == -4);
    CHECK(Rational(5, 8).is_dyadic());
    CHECK(!Rational(1, 3).is_dyadic());
    CHECK(Rational(4).is_integer());
}

TEST_CASE("cantor ball depth") {
    CHECK(*cantor_ball_depth(Rational(2)) == 0);
    CHECK(*cantor_ball_depth(Rational(1)) == 1);
    CHECK(*cantor_ball_depth(Rational(1, 2)) == 2);
    CHECK(*cantor_ball_depth(Rational(3, 8)) == 2); // 1/4 < 3/8
    CHECK(*cantor_ball_depth(Rational(1, 4)) == 3);
    CHECK(!cantor_ball_depth(Rational(0)).has_value());
}

TEST_CASE("interval arithmetic") {
    Interval a{Rational(1), Rational(2)};
    Interval b{Rational(-1), Rational(3)};
    CHECK((a + b).lo == Rational(0));
    CHECK((a + b).hi == Rational(5));
    CHECK((a * b).lo == Rational(-2));
    CHECK((a * b).hi == Rational(6));
    CHECK((a - a).lo == Rational(-1)); // interval arithmetic, no correlation
    CHECK_THROWS_AS(a / b, ContractError);
    Interval c{Rational(2), Rational(4)};
    CHECK((a / c).lo == Rational(1, 4));
    CHECK((a / c).hi == Rational(1));
    CHECK(meet(a, b).lo == Rational(1));
    CHECK(meet(a, b).hi == Rational(2));
    CHECK(hull(a, b).lo == Rational(-1));
    Interval d{Rational(5), Rational(6)};
    CHECK_THROWS_AS(meet(a, d), ContractError);
}

TEST_CASE("located real enclosures nest and narrow") {
    // interval generator centred on 1/3 with padding 2^-(p+1)
    LocatedReal x([](long p) {
        Rational r = Rational::pow2(-p - 1);
        return Interval{Rational(1, 3) - r, Rational(1, 3) + r};
    });
    for (long p = 0; p < 20; ++p) {
        Interval e = x.refine(p);
        CHECK(e.width() <= Rational::pow2(-p));
        CHECK(e.contains(Rational(1, 3)));
        Interval finer = x.refine(p + 5);
        CHECK(e.lo <= finer.lo);
        CHECK(finer.hi <= e.hi);
    }

    LocatedReal y(Rational(1, 4));
    LocatedReal sum = x + y;
    CHECK(sum.refine(30).contains(Rational(7, 12)));
    LocatedReal prod = x * y;
    CHECK(prod.refine(30).contains(Rational(1, 12)));
    LocatedReal q = LocatedReal::div(sum, y);
    CHECK(q.refine(20).contains(Rational(7, 3)));
    LocatedReal z = x - x; // encloses 0 at every precision
    CHECK_THROWS_AS(LocatedReal::div(x, z, 12).refine(0), DivisorStraddlesZero);
}

TEST_CASE("generator breaking its width promise is caught") {
    LocatedReal bad([](long) { return Interval{Rational(0), Rational(1)}; });
    CHECK_NOTHROW(bad.refine(0));
    CHECK_THROWS_AS(bad.refine(3), ContractError);
}

TEST_CASE("squeeze refuses to stall") {
    auto stuck = [](long) { return Interval{Rational(0), Rational(1)}; };
    CHECK_THROWS_AS(LocatedReal::squeeze(stuck, 32, "stuck").refine(4), EnclosureStall);
}

TEST_CASE("lower real monotone bounds") {
    // sum of 2^-(k+1): converges to 1 from below
    LowerReal s = LowerReal::sum(
        [](std::size_t k) { return LowerReal(Rational::pow2(-static_cast<long>(k) - 1)); });
    auto b5 = s.bound(5);
    auto b10 = s.bound(10);
    REQUIRE(b5.has_value());
    REQUIRE(b10.has_value());
    CHECK(*b5 <= *b10);
    CHECK(*b10 >= Rational(1) - Rational::pow2(-10));
    CHECK(*b10 <= Rational(1));

    LowerReal bottom([](std::size_t) { return std::nullopt; });
    CHECK(!bottom.bound(8).has_value());
    CHECK(bottom.bound_or(8, Rational(-5)) == Rational(-5));

    // a generator that dips is repaired into a monotone chain
    LowerReal dip([](std::size_t n) { return n == 3 ? Rational(-1) : Rational(static_cast<long>(n)); });
    CHECK(*dip.bound(3) == Rational(2));
    CHECK(*dip.bound(4) == Rational(4));
}

TEST_CASE("semidecisions") {
    LocatedReal third(Rational(1, 3));
    LocatedReal close(Rational(1, 3) + Rational::pow2(-40));
    SemiBool lt = semidecide_lt(third, close, 60);
    CHECK(lt.yes);
    CHECK(semidecide_lt(close, third, 60).yes == false); // exhausts fuel, no lie

    LowerReal half([](std::size_t) { return Rational(1, 2); });
    CHECK(semidecide_lt(third, half, 20).yes);
    CHECK(semidecide_positive(half, 5).yes);
    LowerReal zero([](std::size_t) { return Rational(0); });
    CHECK(!semidecide_positive(zero, 20).yes);
}

TEST_CASE("pi enclosure") {
    Interval p = pi_enclosure(40);
    CHECK(p.width() <= Rational::pow2(-40));
    // 3.14159265 < pi < 3.14159266
    CHECK(p.lo > Rational(314159265, 100000000));
    CHECK(p.hi < Rational(314159266, 100000000));
}

TEST_CASE("sin(pi q) enclosures") {
    // exact values at integers and half-integers
    Interval z = sin_pi_enclosure(Rational(7), 10);
    CHECK(z.is_point());
    CHECK(z.lo == Rational(0));
    Interval one = sin_pi_enclosure(Rational(5, 2), 10);
    CHECK(one.is_point());
    CHECK(one.lo == Rational(1));
    Interval minus = sin_pi_enclosure(Rational(-1, 2), 10);
    CHECK(minus.is_point());
    CHECK(minus.lo == Rational(-1));

    // sin(pi/6) = 1/2 exactly
    Interval s = sin_pi_enclosure(Rational(1, 6), 30);
    CHECK(s.width() <= Rational::pow2(-30));
    CHECK(s.contains(Rational(1, 2)));

    // symmetry: sin(pi (1 - q)) = sin(pi q)
    Interval a = sin_pi_enclosure(Rational(1, 5), 25);
    Interval b = sin_pi_enclosure(Rational(4, 5), 25);
    CHECK(a.lo <= b.hi);
    CHECK(b.lo <= a.hi);

    // sign: sin(pi (1 + 1/3)) < 0
    Interval neg = sin_pi_enclosure(Rational(4, 3), 20);
    CHECK(neg.hi < Rational(0));
}

TEST_CASE("integral of cos(2^(K+1) pi t)") {
    // grid-aligned endpoints make the integral exactly zero
    Interval z = cos_pow2_integral(2, Rational(1, 8), Rational(3, 8), 20);
    CHECK(z.is_point());
    CHECK(z.lo == Rational(0));

    // int_0^{1/16} cos(8 pi t) dt = sin(pi/2) / (8 pi) = 1/(8 pi)
    Interval v = cos_pow2_integral(2, Rational(0), Rational(1, 16), 30);
    Interval expect = Interval{Rational(1), Rational(1)} /
                      (pi_enclosure(40) * Interval{Rational(8), Rational(8)});
    CHECK(v.lo <= expect.hi);
    CHECK(expect.lo <= v.hi);
    CHECK(v.width() <= Rational::pow2(-30));
}
