#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "disint/continuity.hpp"
#include "disint/errors.hpp"

using namespace disint;

namespace {

Measure lebesgue() { return Measure::lebesgue_unit(); }

Ball unit_ball(const Rational& center, const Rational& radius) {
    return Ball{Space::unit_tag(center), radius};
}

// handmade continuity set (0, 1/2) with witness (1/2, 1) on [0,1]
ContinuitySet left_half() {
    Space sp = Space::unit_interval();
    return {OpenSet::of_balls(sp, {unit_ball(Rational(1, 4), Rational(1, 4))}),
            OpenSet::of_balls(sp, {unit_ball(Rational(3, 4), Rational(1, 4))})};
}

std::vector<Rational> first_radii(const RadiiStream& rs, std::size_t n) {
    std::vector<Rational> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(rs.at(k));
    return out;
}

bool contains_value(const std::vector<Rational>& v, const Rational& q) {
    for (const auto& x : v)
        if (x == q) return true;
    return false;
}

} // namespace

TEST_CASE("certified radii: atomless measures keep the dyadic walk") {
    RadiiStream rs = continuity_radii(lebesgue());
    CHECK(rs.at(0) == Rational(1));
    CHECK(rs.at(1) == Rational(1, 3));
    CHECK(rs.at(2) == Rational(1, 2));
    CHECK(rs.at(4) == Rational(1, 4));
    // strictly positive, no duplicates in a healthy prefix
    auto v = first_radii(rs, 64);
    std::set<Rational> distinct;
    for (const auto& q : v) {
        CHECK(q.sign() > 0);
        CHECK(q <= Rational(1));
        distinct.insert(q);
    }
    CHECK(distinct.size() == v.size());
}

TEST_CASE("certified radii: a dyadic atom expels every colliding dyadic radius") {
    Measure mix = Measure::convex({{Rational(1, 2), Measure::dirac(Space::unit_interval(),
                                                                   Space::unit_tag(Rational(1, 2)))},
                                   {Rational(1, 2), lebesgue()}});
    auto v = first_radii(continuity_radii(mix), 48);
    // any dyadic <= 1/2 puts some dense center exactly on the atom's sphere
    CHECK(!contains_value(v, Rational(1, 2)));
    CHECK(!contains_value(v, Rational(1, 4)));
    CHECK(!contains_value(v, Rational(1, 8)));
    CHECK(!contains_value(v, Rational(1, 16)));
    // radii out of the atom's reach survive, as do the odd-denominator windows
    CHECK(contains_value(v, Rational(3, 4)));
    CHECK(contains_value(v, Rational(1, 3)));
    for (const auto& q : v) CHECK(mix.radius_good(q));
}

TEST_CASE("certified radii: uniform cantor drops exactly the metric's value set") {
    auto v = first_radii(continuity_radii(Measure::cantor_uniform()), 48);
    CHECK(!contains_value(v, Rational(1)));
    CHECK(!contains_value(v, Rational(1, 2)));
    CHECK(!contains_value(v, Rational(1, 4)));
    CHECK(contains_value(v, Rational(3, 4)));
    CHECK(contains_value(v, Rational(3, 8)));
    CHECK(contains_value(v, Rational(1, 3)));
}

TEST_CASE("basis ball carries a genuine complement witness") {
    ContinuityBasis basis(lebesgue());
    // locate radius 1/4 in the stream, center 1/2 in the dense order
    std::size_t k = 0;
    while (basis.radii().at(k) != Rational(1, 4)) ++k;
    std::size_t n = ContinuityBasis::ball_index(2, k);
    REQUIRE(ContinuityBasis::is_ball(n));
    Ball b = basis.ball_of(n);
    CHECK(Space::unit_interval().unit_value(b.center) == Rational(1, 2));
    CHECK(b.radius == Rational(1, 4));

    ContinuitySet h = basis.set(n);
    CHECK(h.u.prefix(4).size() == 1);
    // a point of the complement interior is certified inside the witness
    CHECK(member(Point::unit_rational(Rational(7, 8)), h.v, 40).yes);
    CHECK(member(Point::unit_rational(Rational(1, 16)), h.v, 40).yes);
    // a point of the ball is certified in u and never in v
    CHECK(member(Point::unit_rational(Rational(3, 10)), h.u, 40).yes);
    CHECK(!member(Point::unit_rational(Rational(3, 10)), h.v, 40).yes);
    // coarse two-sided enclosure already pins 1/2
    Interval enc = cset_measure(lebesgue(), h).refine(3);
    CHECK(enc.contains(Rational(1, 2)));
}

TEST_CASE("cset_measure: handmade witnesses are exact") {
    Interval enc = cset_measure(lebesgue(), left_half()).refine(30);
    CHECK(enc.lo == Rational(1, 2));
    CHECK(enc.hi == Rational(1, 2));

    // discrete: mu{0} = 1/3 on the naturals
    Space nat = Space::naturals();
    Measure mu = Measure::finite({nat, {{Tag(0), Rational(1, 3)}, {Tag(1), Rational(2, 3)}}});
    ContinuitySet h{OpenSet::of_balls(nat, {Ball{Tag(0), Rational(1, 2)}}),
                    OpenSet::of_balls(nat, {Ball{Tag(1), Rational(1, 2)}})};
    Interval e2 = cset_measure(mu, h).refine(20);
    CHECK(e2.lo == Rational(1, 3));
    CHECK(e2.hi == Rational(1, 3));
}

TEST_CASE("cset_measure: a lying witness is caught") {
    Space sp = Space::unit_interval();
    // u = (0, 1/2) but "witness" (1/8, 7/8) overlaps it: masses sum past 1
    ContinuitySet lying{OpenSet::of_balls(sp, {unit_ball(Rational(1, 4), Rational(1, 4))}),
                        OpenSet::of_balls(sp, {unit_ball(Rational(1, 2), Rational(3, 8))})};
    CHECK_THROWS_AS(cset_measure(lebesgue(), lying), WitnessInconsistent);
}

TEST_CASE("cset algebra: intersect with whole space, complement twice") {
    ContinuitySet h = left_half();
    ContinuitySet wh = cset_whole(Space::unit_interval());
    Interval a = cset_measure(lebesgue(), cset_intersect(h, wh)).refine(10);
    CHECK(a.contains(Rational(1, 2)));
    CHECK(a.width() <= Rational::pow2(-10));

    ContinuitySet back = cset_complement_witness(cset_complement_witness(h));
    CHECK(cset_measure(lebesgue(), back).refine(20).lo == Rational(1, 2));
    CHECK(cset_measure(lebesgue(), cset_complement_witness(h)).refine(20).lo == Rational(1, 2));
}

TEST_CASE("cset algebra: product witness composes to measure 1/4") {
    ContinuitySet p = cset_product(left_half(), left_half());
    Measure leb2 = Measure::product(lebesgue(), lebesgue());
    Interval enc = cset_measure(leb2, p).refine(8);
    CHECK(enc.contains(Rational(1, 4)));
    CHECK(enc.width() <= Rational::pow2(-8));

    // invariant: stagewise u/v bounds never sum past 1
    LowerReal eu = leb2.eval(p.u);
    LowerReal ev = leb2.eval(p.v);
    for (std::size_t n = 0; n < 8; ++n)
        CHECK(eu.bound_or(n, Rational(0)) + ev.bound_or(n, Rational(0)) <= Rational(1));
}

TEST_CASE("cset algebra: space mismatch is refused") {
    Space nat = Space::naturals();
    ContinuitySet h_nat{OpenSet::of_balls(nat, {Ball{Tag(0), Rational(1, 2)}}),
                        OpenSet::of_balls(nat, {Ball{Tag(1), Rational(1, 2)}})};
    CHECK_THROWS_AS(cset_intersect(left_half(), h_nat), SpaceMismatch);
    CHECK_THROWS_AS(cset_union(h_nat, left_half()), SpaceMismatch);
}

TEST_CASE("stagewise u/v bounds sum to at most 1 and approach it") {
    ContinuitySet h = left_half();
    LowerReal eu = lebesgue().eval(h.u);
    LowerReal ev = lebesgue().eval(h.v);
    for (std::size_t n = 0; n < 12; ++n)
        CHECK(eu.bound_or(n, Rational(0)) + ev.bound_or(n, Rational(0)) <= Rational(1));
    CHECK(eu.bound_or(6, Rational(0)) + ev.bound_or(6, Rational(0)) == Rational(1));
}

TEST_CASE("decompose unions back to the set") {
    ContinuityBasis basis(lebesgue());
    OpenSet probe = OpenSet::of_balls(Space::unit_interval(),
                                      {unit_ball(Rational(1, 2), Rational(1, 4))});
    auto dec = basis.decompose(probe);

    std::set<std::size_t> indices;
    for (std::size_t i = 0; i < 400; ++i)
        if (auto n = dec(i)) indices.insert(*n);
    REQUIRE(!indices.empty());

    std::vector<Ball> parts;
    for (std::size_t n : indices) {
        Ball b = basis.ball_of(n);
        // every decomposition ball sits inside the probe
        CHECK(ball_contains(Space::unit_interval(), probe.prefix(1)[0], b));
        parts.push_back(b);
    }
    // and they already recover the full measure (the sharp slot hit exactly)
    Rational got = lebesgue().eval(OpenSet::of_balls(Space::unit_interval(), parts))
                       .bound_or(6, Rational(0));
    CHECK(got == Rational(1, 2));

    // member-level correctness: an inside point lands in the decomposition
    OpenSet rebuilt = OpenSet::of_balls(Space::unit_interval(), parts);
    CHECK(member(Point::unit_rational(Rational(3, 10)), rebuilt, 60).yes);
}

TEST_CASE("decompose on the discrete naturals reaches singletons") {
    Space nat = Space::naturals();
    Measure mu = Measure::finite({nat, {{Tag(5), Rational(1, 4)}, {Tag(0), Rational(3, 4)}}});
    ContinuityBasis basis(mu);
    OpenSet probe = OpenSet::of_balls(nat, {Ball{Tag(5), Rational(1)}});
    auto dec = basis.decompose(probe);
    std::vector<Ball> parts;
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < 2000; ++i)
        if (auto n = dec(i)) {
            if (seen.insert(*n).second) parts.push_back(basis.ball_of(*n));
        }
    REQUIRE(!parts.empty());
    for (const auto& b : parts) CHECK(nat.dense_metric(b.center, Tag(5)) < b.radius);
    Rational got = mu.eval(OpenSet::of_balls(nat, parts)).bound_or(4, Rational(0));
    CHECK(got == Rational(1, 4));
}

TEST_CASE("measure_from_basis round trips and rejects lies") {
    ContinuityBasis basis(lebesgue());

    auto honest = [&](const std::vector<std::size_t>& idx) {
        std::vector<Ball> balls;
        for (std::size_t n : idx) balls.push_back(basis.ball_of(n));
        return LocatedReal(*lebesgue().mass_exact(balls));
    };
    Measure recon = measure_from_basis(basis, honest);

    OpenSet probe = OpenSet::of_balls(Space::unit_interval(),
                                      {unit_ball(Rational(1, 2), Rational(1, 4))});
    CHECK(recon.eval(probe).bound_or(6, Rational(0)) == Rational(1, 2));

    OpenSet probe2 = OpenSet::of_balls(Space::unit_interval(),
                                       {unit_ball(Rational(1, 2), Rational(1, 3))});
    CHECK(recon.eval(probe2).bound_or(6, Rational(0)) == Rational(2, 3));

    CHECK(recon.eval(OpenSet::empty(Space::unit_interval())).bound_or(5, Rational(0)) ==
          Rational(0));

    // a value map that zeroes out multi-ball unions breaks monotonicity /
    // additivity on provably disjoint balls and must be refused
    auto lying = [&](const std::vector<std::size_t>& idx) {
        if (idx.size() == 1) return honest(idx);
        return LocatedReal(Rational(0));
    };
    Measure bad = measure_from_basis(basis, lying);
    OpenSet two = OpenSet::of_balls(Space::unit_interval(),
                                    {unit_ball(Rational(1, 4), Rational(1, 8)),
                                     unit_ball(Rational(3, 4), Rational(1, 8))});
    CHECK_THROWS_AS(bad.eval(two).bound(8), InconsistentValues);
}
