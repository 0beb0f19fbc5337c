#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "disint/conditioning.hpp"
#include "disint/constructions.hpp"
#include "disint/errors.hpp"
#include "disint/trig.hpp"

using namespace disint;

namespace {

std::vector<bool> wbits(const char* s) {
    std::vector<bool> w;
    for (; *s; ++s) w.push_back(*s == '1');
    return w;
}

// {row} x (lo, hi) as a single ball of product(N, [0,1])
Ball row_window(const Space& sp, unsigned long row, const Rational& lo, const Rational& hi) {
    Rational mid = (lo + hi) / 2, r = (hi - lo) / 2;
    return Ball{sp.pair({Tag(row), Space::unit_tag(mid)}), r};
}

// {row} x [0,1]: radius 1 pins the height, the window clips to everything
Ball row_all(const Space& sp, unsigned long row) {
    return Ball{sp.pair({Tag(row), Space::unit_tag(Rational(1, 2))}), Rational(1)};
}

// {row} x [w] as a single ball of product(N, 2^w)
Ball row_cyl(const Space& sp, unsigned long row, const char* w) {
    auto word = wbits(w);
    return Ball{sp.pair({Tag(row), Space::cantor_tag(word)}),
                Rational::pow2(1 - (long)word.size())};
}

// {row} x [wu] x [wv] as a single ball of the mixture space (equal depths)
Ball mix_ball(const Space& sp, unsigned long row, const char* wu, const char* wv) {
    auto u = wbits(wu), v = wbits(wv);
    REQUIRE(u.size() == v.size());
    const Space& inner = sp.factors()[1];
    Tag t = inner.pair({Space::cantor_tag(u), Space::cantor_tag(v)});
    return Ball{sp.pair({Tag(row), t}), Rational::pow2(1 - (long)u.size())};
}

std::vector<bool> point_prefix(const Point& s, std::size_t n) {
    auto w = s.space().cantor_word(s.at((long)n + 2));
    w.resize(n);
    return w;
}

// does the bit string contain the substring 0 1^k 0?
bool has_block(const std::vector<bool>& b, unsigned long k) {
    for (std::size_t j = 0; j + k + 2 <= b.size(); ++j) {
        if (b[j]) continue;
        bool ok = !b[j + k + 1];
        for (unsigned long t = 1; ok && t <= k; ++t) ok = b[j + t];
        if (ok) return true;
    }
    return false;
}

WitnessTable table_for(std::vector<unsigned long> ks) {
    std::vector<std::pair<unsigned long, std::size_t>> arr;
    for (auto k : ks) arr.push_back({k, 0});
    return WitnessTable::ground_truth(arr);
}

}  // namespace

TEST_CASE("witness tables locate first witnesses and reject retractions") {
    WitnessTable empty = WitnessTable::ground_truth({});
    CHECK(!empty.y(0, 0));
    CHECK(!empty.y(7, 50));
    CHECK(!empty.iota(3, 64).has_value());

    WitnessTable one = WitnessTable::ground_truth({{0, 3}});
    CHECK(!one.y(0, 2));
    CHECK(one.y(0, 3));
    CHECK(one.y(0, 11));
    CHECK(*one.iota(0, 10) == 3);
    CHECK(!one.iota(0, 2).has_value());
    CHECK(!one.iota(1, 40).has_value());

    // duplicate arrivals keep the earliest stage
    WitnessTable dup = WitnessTable::ground_truth({{2, 9}, {2, 4}});
    CHECK(*dup.iota(2, 20) == 4);

    // a non-monotone backing function is caught on the second read
    WitnessTable bad(
        [](unsigned long, std::size_t n) { return n == 1; });  // true at 1, false at 2
    CHECK(bad.y(0, 1));
    CHECK_THROWS_AS(bad.y(0, 2), ContractError);

    Enumeration e = Enumeration::finite({{5, 2}});
    WitnessTable we = witness_table(e);
    CHECK(*we.iota(5, 8) == 2);
    CHECK(!we.iota(4, 8).has_value());
}

TEST_CASE("dyadic intervals validate and convert") {
    DyadicInterval j(3, 7, 4);
    CHECK(j.lo() == Rational(3, 16));
    CHECK(j.hi() == Rational(7, 16));
    CHECK(j.length() == Rational(1, 4));
    CHECK_THROWS_AS(DyadicInterval(3, 3, 4), ContractError);
    CHECK_THROWS_AS(DyadicInterval(0, 17, 4), ContractError);
}

TEST_CASE("interval rows: totals, row masses, normalization") {
    Measure mu = mu_x(table_for({1, 3}));
    const Space& sp = mu.space();

    CHECK(*mu.mass_exact({Ball{Tag(0), Rational(2)}}) == Rational(1));

    // every row holds 2^-(m+2), both parities
    for (unsigned long n = 0; n < 8; ++n)
        CHECK(*mu.mass_exact({row_all(sp, n)}) == Rational::pow2(-(long)(n / 2) - 2));

    // first 2M rows sum to 1 - 2^-M, exactly
    std::vector<Ball> rows;
    for (unsigned long n = 0; n < 12; ++n) rows.push_back(row_all(sp, n));
    CHECK(*mu.mass_exact(rows) == Rational(1) - Rational::pow2(-6));

    // the valuation path reaches the same flat values immediately
    CHECK(*mu.eval(row_cylinder(sp, 2)).bound(3) == Rational(1, 8));

    CHECK(mu.radius_good(Rational(1, 3)));
    CHECK(mu.radius_good(Rational(1, 4)));  // no atoms on the interval factor
    CHECK(!mu.radius_good(Rational(1)));    // discrete sphere at distance 1
    CHECK(mu.marginal_second().has_value());
    CHECK(*mu.marginal_second()->eval(OpenSet::of_balls(
               Space::unit_interval(), {Ball{Space::unit_tag(Rational(1, 4)), Rational(1, 4)}}))
               .bound(4) == Rational(1, 2));
}

TEST_CASE("interval rows: aligned windows exact, live waves enclose the closed form") {
    Measure mu = mu_x(WitnessTable::ground_truth({{0, 5}}));  // first witness column 5
    const Space& sp = mu.space();

    // windows coarser than the wave stay flat and exact
    CHECK(*mu.mass_exact({row_window(sp, 0, Rational(0), Rational(1, 8))}) ==
          Rational(1, 4) * Rational(1, 8));
    CHECK(*mu.mass_exact({row_window(sp, 0, Rational(3, 16), Rational(7, 16))}) ==
          Rational(1, 4) * Rational(1, 4));
    CHECK(*mu.mass_exact({row_window(sp, 0, Rational(0), Rational(1, 32))}) ==
          Rational(1, 4) * Rational(1, 32));
    CHECK(*mu.mass_exact({row_window(sp, 1, Rational(0), Rational(1, 32))}) ==
          Rational(1, 4) * Rational(1, 32));

    // resolution 7 beats the wave scale 2^-6: the cosine term goes live
    Ball live0 = row_window(sp, 0, Rational(0), Rational(1, 128));
    Ball live1 = row_window(sp, 1, Rational(0), Rational(1, 128));
    CHECK(!mu.mass_exact({live0}).has_value());
    CHECK(!mu.mass_exact({live1}).has_value());

    // independent closed form: 1/4 (2^-7 +- 1/(64 pi)), using only pi
    Interval pi = pi_enclosure(40);
    Interval term = Interval(Rational(1)) / (pi * Interval(Rational(64)));
    Interval even = (Interval(Rational(1, 128)) + term) * Rational(1, 4);
    Interval odd = (Interval(Rational(1, 128)) - term) * Rational(1, 4);
    Rational lo0 = mu.mass_lower({live0}, 25);
    Rational lo1 = mu.mass_lower({live1}, 25);
    CHECK(lo0 >= even.lo - Rational::pow2(-20));
    CHECK(lo0 <= even.hi);
    CHECK(lo1 >= odd.lo - Rational::pow2(-20));
    CHECK(lo1 <= odd.hi);
}

TEST_CASE("digit pushforward agrees with the interval rows") {
    WitnessTable wt = table_for({1, 3});
    Measure mu = mu_x(wt);
    Measure eta = eta_x(wt);
    const Space& msp = mu.space();
    const Space& esp = eta.space();

    const char* words[] = {"0", "1", "01", "110", "0000"};
    for (unsigned long n = 0; n < 4; ++n) {
        for (const char* w : words) {
            auto word = wbits(w);
            Rational lo(0);
            for (std::size_t i = 0; i < word.size(); ++i)
                if (word[i]) lo += Rational::pow2(-(long)i - 1);
            Rational hi = lo + Rational::pow2(-(long)word.size());
            auto a = eta.mass_exact({row_cyl(esp, n, w)});
            auto b = mu.mass_exact({row_window(msp, n, lo, hi)});
            CHECK(a.has_value() == b.has_value());
            if (a) CHECK(*a == *b);
            Rational la = eta.mass_lower({row_cyl(esp, n, w)}, 25);
            Rational lb = mu.mass_lower({row_window(msp, n, lo, hi)}, 25);
            CHECK((la - lb).abs() <= Rational::pow2(-20));
        }
    }

    // depth-1 cylinders are aligned for every wave, so exact even on live rows
    CHECK(*eta.mass_exact({row_cyl(esp, 2, "1")}) == Rational(1, 16));
    // depth-2 cylinders beat the wave scale of iota = 0 rows
    CHECK(!eta.mass_exact({row_cyl(esp, 2, "10")}).has_value());

    // rows 0..9 with a fixed word sum to (1 - 2^-5) 2^-|w|; waves cancel in
    // pairs, so the valuation converges there even though single rows stay open
    std::vector<Ball> ten;
    for (unsigned long n = 0; n < 10; ++n) ten.push_back(row_cyl(esp, n, "10"));
    Rational sum = eta.mass_lower(ten, 25);
    Rational expect = (Rational(1) - Rational::pow2(-5)) * Rational(1, 4);
    CHECK(sum <= expect);
    CHECK(sum >= expect - Rational::pow2(-20));

    CHECK(!eta.radius_good(Rational(1, 4)));  // cantor sphere radii carry mass
    CHECK(eta.radius_good(Rational(1, 3)));
    CHECK(*eta.marginal_second()
               ->eval(OpenSet::of_balls(Space::cantor(),
                                        {Ball{Space::cantor_tag(wbits("000")), Rational(1, 4)}}))
               .bound(5) == Rational(1, 8));
}

TEST_CASE("square embedding preserves row probes and separates heights") {
    Measure base = mu_x(table_for({1, 3}));
    Measure em = embed_discrete(base);
    const Space& sq = em.space();
    const Space& bsp = base.space();

    CHECK(*em.mass_exact({Ball{Tag(0), Rational(2)}}) == Rational(1));

    // alpha heights separate under the phi radii
    for (unsigned long n = 0; n < 10; ++n) {
        Rational gap = embed_alpha(n) - embed_alpha(n + 1);
        CHECK(gap > embed_phi(n).radius + embed_phi(n + 1).radius);
    }

    // a ball near height alpha(0) = 1/2 reads exactly the row-0 window
    Ball p0{sq.pair({Space::unit_tag(Rational(1, 2)), Space::unit_tag(Rational(1, 2))}),
            Rational(1, 8)};
    CHECK(*em.mass_exact({p0}) ==
          *base.mass_exact({row_window(bsp, 0, Rational(3, 8), Rational(5, 8))}));
    CHECK(*em.mass_exact({p0}) == Rational(1, 16));

    // near alpha(2) = 1/8 with a live wave: both sides stay open, bounds agree
    Ball p2{sq.pair({Space::unit_tag(Rational(1, 8)), Space::unit_tag(Rational(1, 2))}),
            Rational(1, 32)};
    CHECK(!em.mass_exact({p2}).has_value());
    Ball mapped = row_window(bsp, 2, Rational(15, 32), Rational(17, 32));
    CHECK(em.mass_lower({p2}, 22) == base.mass_lower({mapped}, 22));

    // a ball engulfing every height: exact mass is undecided, lower bounds
    // sweep up the forced rows deterministically
    Ball straddle{sq.pair({Space::unit_tag(Rational(1, 2)), Space::unit_tag(Rational(1, 2))}),
                  Rational(1, 2)};
    CHECK(!em.mass_exact({straddle}).has_value());
    CHECK(em.mass_lower({straddle}, 8) == Rational(125, 128));  // rows 0..10

    CHECK(!em.radius_good(Rational(1, 4)));  // dyadic radius can hit a row line
    CHECK(em.radius_good(Rational(1, 3)));
    CHECK(em.radius_good(Rational(3, 2)));
    CHECK(em.marginal_second().has_value());
}

TEST_CASE("marker decoding reads arrival stages off bit streams") {
    Point ones = Point::cantor_stream([](std::size_t) { return true; });
    CHECK(rho(ones).emit(20).empty());

    // 1 0 1 1 0 then (10)^w: k=2 completes at 5, the padding feeds k=1 at 13
    Point s = Point::cantor_stream([](std::size_t i) {
        static const bool head[5] = {true, false, true, true, false};
        return i < 5 ? head[i] : ((i - 5) % 2 == 0);
    });
    Enumeration r = rho(s);
    CHECK(r.emit(4).empty());
    CHECK(r.emit(5) == std::set<unsigned long>{2});
    CHECK(r.emit(12) == std::set<unsigned long>{2});
    CHECK(r.emit(13) == std::set<unsigned long>{1, 2});

    CHECK_THROWS_AS(rho(Point::unit_rational(Rational(1, 3))), SpaceMismatch);
}

TEST_CASE("marker encoding round-trips and stays faithful") {
    using Arr = std::vector<std::pair<unsigned long, std::size_t>>;
    std::vector<Arr> cases = {
        {},           {{0, 0}},         {{1, 2}},
        {{0, 1}, {1, 5}},
        {{2, 0}},     {{1, 0}, {3, 0}}, {{0, 3}, {2, 0}, {5, 7}},
        {{4, 11}},
    };
    std::mt19937 gen(7);
    for (int t = 0; t < 4; ++t) {
        Arr a;
        std::set<unsigned long> used;
        int sz = (int)(gen() % 5);
        for (int i = 0; i < sz; ++i) {
            unsigned long k = gen() % 6;
            if (used.insert(k).second) a.push_back({k, gen() % 12});
        }
        cases.push_back(a);
    }

    for (const Arr& arr : cases) {
        std::set<unsigned long> want;
        for (auto& [k, at] : arr) want.insert(k);
        Point s = rho_inverse(Enumeration::finite(arr));
        auto bits = point_prefix(s, 1600);
        for (unsigned long k = 0; k <= 12; ++k) {
            CAPTURE(k);
            CHECK(has_block(bits, k) == (want.count(k) > 0));
        }
        CHECK(rho(s).emit(1500) == want);
    }
}

TEST_CASE("marker encoding honors demand order") {
    // the second marker arrives after bits were already handed out
    Point s = rho_inverse(Enumeration::finite({{1, 0}, {3, 20}}));
    auto early = point_prefix(s, 33);  // forces placement past the frontier
    auto bits = point_prefix(s, 200);
    for (std::size_t i = 0; i < early.size(); ++i) CHECK(early[i] == bits[i]);
    CHECK(rho(s).emit(400) == std::set<unsigned long>{1, 3});
    for (unsigned long k = 0; k <= 8; ++k)
        CHECK(has_block(bits, k) == (k == 1 || k == 3));

    // reading the prefix first defers nothing: same set, same faithfulness
    Point s2 = rho_inverse(Enumeration::finite({{1, 0}, {3, 20}}));
    auto head = point_prefix(s2, 10);
    auto bits2 = point_prefix(s2, 400);
    for (std::size_t i = 0; i < head.size(); ++i) CHECK(head[i] == bits2[i]);
    CHECK(rho(s2).emit(600) == std::set<unsigned long>{1, 3});

    // the canonical immediate-arrival stream: 1,0,1,0 then 1110 repeated
    Point s3 = rho_inverse(Enumeration::finite({{1, 0}, {3, 0}}));
    auto b3 = point_prefix(s3, 16);
    std::vector<bool> expect = wbits("1010111011101110");
    CHECK(b3 == expect);
}

TEST_CASE("mixture: totals, cylinder marginals, pairwise wave cancellation") {
    Measure mix = mixture();
    const Space& sp = mix.space();

    CHECK(*mix.mass_exact({Ball{Tag(0), Rational(2)}}) == Rational(1));

    // single rows over a shallow box: flat and exact
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0", "0")}) == Rational(1, 16));
    CHECK(*mix.mass_exact({mix_ball(sp, 1, "0", "0")}) == Rational(1, 16));
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0", "0"), mix_ball(sp, 1, "0", "0")}) ==
          Rational(1, 8));
    CHECK(*mix.mass_exact({mix_ball(sp, 4, "1", "1")}) == Rational(1, 64));

    // containment and disjoint union inside one row
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0", "0"), mix_ball(sp, 0, "00", "01")}) ==
          Rational(1, 16));
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0", "0"), mix_ball(sp, 0, "1", "1")}) ==
          Rational(1, 8));
    // cross-depth union: plain area since no marker fits the horizon
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0", "0"), mix_ball(sp, 0, "11", "01")}) ==
          Rational(5, 64));

    // a decided marker whose wave is still aligned with the box: exact flat
    CHECK(*mix.mass_exact({mix_ball(sp, 0, "0000", "0000")}) == Rational(1, 4) * Rational(1, 256));

    // live wave: decoder decides early (witness column 3), box resolution 5
    Ball live = mix_ball(sp, 0, "00000", "00000");
    CHECK(!mix.mass_exact({live}).has_value());
    Interval pi = pi_enclosure(40);
    Interval term = Interval(Rational::pow2(-5)) / (pi * Interval(Rational(16)));
    Interval expect = (Interval(Rational::pow2(-10)) + term) * Rational(1, 4);
    Rational lo = mix.mass_lower({live}, 25);
    CHECK(lo >= expect.lo - Rational::pow2(-20));
    CHECK(lo <= expect.hi);

    // odd row flips the wave sign
    Ball live1 = mix_ball(sp, 1, "00000", "00000");
    Interval expect1 = (Interval(Rational::pow2(-10)) - term) * Rational(1, 4);
    Rational lo1 = mix.mass_lower({live1}, 25);
    CHECK(lo1 >= expect1.lo - Rational::pow2(-20));
    CHECK(lo1 <= expect1.hi);

    // second marginal is the uniform product measure
    Measure mg = *mix.marginal_second();
    const Space& msp = mg.space();
    Ball box{msp.pair({Space::cantor_tag(wbits("01")), Space::cantor_tag(wbits("10"))}),
             Rational(1, 2)};
    CHECK(*mg.eval(OpenSet::of_balls(msp, {box})).bound(6) == Rational(1, 16));

    CHECK(!mix.radius_good(Rational(1, 2)));
    CHECK(mix.radius_good(Rational(2, 3)));
}

TEST_CASE("mixture rows match an independently summed branch value") {
    Measure mix = mixture();
    const Space& sp = mix.space();

    // row 2 decodes k = 1; wv = 001000 completes it at column 4, and the
    // box resolution 6 beats the wave scale 2^-5
    Ball b = mix_ball(sp, 2, "000000", "001000");
    CHECK(!mix.mass_exact({b}).has_value());
    Interval pi = pi_enclosure(40);
    Interval term = Interval(Rational::pow2(-6)) / (pi * Interval(Rational(32)));
    Interval expect = (Interval(Rational::pow2(-12)) + term) * Rational(1, 8);
    Rational lo = mix.mass_lower({b}, 28);
    CHECK(lo >= expect.lo - Rational::pow2(-24));
    CHECK(lo <= expect.hi);

    // same words on the odd row of the pair
    Ball b3 = mix_ball(sp, 3, "000000", "001000");
    Interval expect3 = (Interval(Rational::pow2(-12)) - term) * Rational(1, 8);
    Rational lo3 = mix.mass_lower({b3}, 28);
    CHECK(lo3 >= expect3.lo - Rational::pow2(-24));
    CHECK(lo3 <= expect3.hi);

    // wv that never completes k = 1 within the horizon: flat and exact
    CHECK(*mix.mass_exact({mix_ball(sp, 2, "000000", "010110")}) ==
          Rational(1, 8) * Rational::pow2(-12));
}

TEST_CASE("mixture ratios converge to the calibrated atom values") {
    // parameter set {1}: its decoded stream is 1,0,1,0,... with witness end 4
    Point s = rho_inverse(Enumeration::finite({{1, 0}}));
    Measure mix = mixture();
    const Space& sp = mix.space();

    for (std::size_t n : {8, 12}) {
        auto sn = point_prefix(s, n);
        std::string wu(n, '0'), wv;
        for (bool bit : sn) wv.push_back(bit ? '1' : '0');
        Ball num_ball = mix_ball(sp, 2, wu.c_str(), wv.c_str());
        Rational denom = Rational::pow2(-2 * (long)n);  // uniform marginal of the box
        Rational num = mix.mass_lower({num_ball}, 30);
        Rational ratio = num / denom;
        CHECK(ratio <= Rational(1, 4));  // the true ratio approaches 1/4 from below
        CHECK(ratio >= Rational(1, 4) - Rational::pow2(-(long)n + 3));
    }
}

TEST_CASE("marker completion mass is enclosed and vanishes along the prefix") {
    // a completed marker inside the prefix: the whole cylinder qualifies
    Interval done = marker_completion_mass(wbits("000"), 0, 3);
    CHECK(done.lo == Rational(1, 8));
    CHECK(done.hi == Rational(1, 8));

    Point s = rho_inverse(Enumeration::finite({{1, 0}}));  // 1,0,1,0,...
    Interval in = marker_completion_mass(point_prefix(s, 6), 1, 20);
    CHECK(in.lo == Rational::pow2(-6));
    CHECK(in.hi == Rational::pow2(-6));

    // k = 0 never completes inside (10)^w; the leak shrinks like 2^-n
    Interval m6 = marker_completion_mass(point_prefix(s, 6), 0, 20);
    CHECK(m6.lo >= Rational::pow2(-11));
    CHECK(m6.hi <= Rational::pow2(-10));
    Interval m10 = marker_completion_mass(point_prefix(s, 10), 0, 24);
    CHECK(m10.hi <= Rational::pow2(-18));
    CHECK(m10.lo <= m10.hi);

    CHECK_THROWS_AS(marker_completion_mass({}, 0, 30), ContractError);
}

TEST_CASE("atom calibration recovery reads bits and flags ambiguity") {
    Space nat = Space::naturals();
    Measure nu = Measure::finite({nat,
                                  {{Tag(0), Rational(1, 4)},
                                   {Tag(2), Rational(1, 4)},
                                   {Tag(4), Rational(1, 8)},
                                   {Tag(6), Rational(1, 32)},
                                   {Tag(1), Rational(11, 32)}}});
    CHECK(!recover_bit(nu, 0));  // 2^-2 is the low calibration for k = 0
    CHECK(recover_bit(nu, 1));   // 2^-2 is the high calibration for k = 1
    CHECK(recover_bit(nu, 2));
    CHECK(!recover_bit(nu, 3));
    auto x = recover_x(nu);
    CHECK(!x(0));
    CHECK(x(1));

    Measure amb = Measure::finite({nat, {{Tag(0), Rational(3, 8)}, {Tag(1), Rational(5, 8)}}});
    CHECK_THROWS_AS(recover_bit(amb, 0), AmbiguousAtom);

    CHECK_THROWS_AS(recover_bit(Measure::lebesgue_unit(), 0), SpaceMismatch);
}

TEST_CASE("row cylinders cover single rows exactly") {
    Measure mu = mu_x(table_for({1, 3}));
    CHECK(*mu.mass_exact(row_cylinder(mu.space(), 3).prefix(8)) == Rational(1, 8));

    Measure eta = eta_x(table_for({}));
    CHECK(*eta.mass_exact(row_cylinder(eta.space(), 0).prefix(8)) == Rational(1, 4));

    Measure mix = mixture();
    CHECK(*mix.mass_exact(row_cylinder(mix.space(), 4).prefix(8)) == Rational(1, 16));

    Space bad = Space::product({Space::naturals(), Space::naturals()});
    CHECK_THROWS_AS(row_cylinder(bad, 0), SpaceMismatch);
    CHECK_THROWS_AS(row_cylinder(Space::cantor(), 0), SpaceMismatch);
}

TEST_CASE("conditioning on an aligned window leaves the row marginal unchanged") {
    Measure mu = mu_x(table_for({1, 3}));
    const Space& sp = mu.space();
    Space unit = Space::unit_interval();
    OpenSet left = OpenSet::of_balls(unit, {Ball{Space::unit_tag(Rational(1, 4)), Rational(1, 4)}});
    OpenSet right =
        OpenSet::of_balls(unit, {Ball{Space::unit_tag(Rational(3, 4)), Rational(1, 4)}});
    ContinuitySet h{cylinder_over_second(sp, left), cylinder_over_second(sp, right)};
    Measure cond = condition(mu, h);

    // (0, 1/2) is aligned for every wave, so each row keeps its mass
    for (unsigned long n : {0ul, 2ul, 3ul}) {
        Rational expect = Rational::pow2(-(long)(n / 2) - 2);
        Rational got = cond.eval(row_cylinder(sp, n)).bound_or(12, Rational(0));
        CHECK(got <= expect);
        CHECK(got >= expect - Rational::pow2(-9));
    }
}
