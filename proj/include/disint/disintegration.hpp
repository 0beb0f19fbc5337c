#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <set>
#include <vector>

#include "disint/conditioning.hpp"
#include "disint/continuity.hpp"
#include "disint/measure.hpp"
#include "disint/oracle.hpp"

namespace disint {

// First-factor content of a measure on product(naturals, T): opens of the
// discrete factor pull back to cylinders over the first coordinate, so every
// probe ball {n} becomes the row-n cylinder of the base measure.  Radius
// certification stays exact (spheres are empty except at radius one).
Measure marginal_first_naturals(const Measure& mu);

// Conditional of a finite-discrete measure on product(naturals, T), computed
// exactly: atoms are classified against the continuity set (decided by exact
// tag distance against the first `scan` balls of each side), the kept mass is
// renormalized, and the result is projected onto the first coordinate.  An
// atom reached by neither side means the set is not a continuity set for this
// measure, which is a contract breach.
FiniteAtoms finite_conditional_content(const FiniteAtoms& base, const ContinuitySet& h,
                                       std::size_t scan = 4096);

// Finite atom list within 2^-precision of a measure on the naturals in total
// variation.  The unresolved tail is folded onto the heaviest atom so the
// weights still sum to one; `slack` bounds the total mass that was moved.
struct DiscreteApproximant {
    FiniteAtoms atoms;
    Rational slack;
};

DiscreteApproximant discretize_naturals(const Measure& m, long precision,
                                        std::size_t row_cap = 512);

// Certified separations between conditional contents.  A triple (m, n, k)
// asserts that basis ball m refines basis ball n (containment checked exactly
// on centers and radii) and that the first-factor contents of the two
// conditioned measures are more than 2^-k apart in total variation.
//
// The refinement filter is what makes "no separation" a usable certificate:
// unrestricted pairs would separate every ball from some later ball far away
// at every scale whenever the conditionals genuinely vary, so the absence of
// a triple would carry no information.  Restricted to refining balls,
// "(m, n, k) never appears for any m >= n" says the conditionals of all finer
// balls inside ball n agree with it to within 2^-k -- an oscillation bound,
// which is exactly what pins the conditional at a point of convergence.
//
// Sound (every returned triple is true), monotone in fuel, possibly empty.
// Only ball-shaped basis elements take part; intersection elements carry no
// exact containment certificate and are skipped.
std::set<std::array<std::size_t, 3>> tjur_distance_triples(const Measure& mu,
                                                           const ContinuityBasis& basis,
                                                           std::size_t fuel);

// The separation program as a monotone enumeration: stage s emits
// diag_pair(n, k) for every certified witness (m, n, k) with m >= n found
// within budget s.  Feeding this through ec() yields the decision map
// "some later refinement of ball n separates at level k" whose complement
// drives the search below.  Distance enclosures and conditioned contents are
// cached across stages, so deeper stages only tighten earlier work.
Enumeration xi_enumeration(const Measure& mu, const ContinuityBasis& basis);

struct TjurResult {
    Measure content;          // first-factor content of the accepted conditional
    FiniteAtoms atoms;        // finite approximant of that content
    std::size_t basis_index;  // accepted (ball-shaped) basis element
    Rational slack;           // total-variation gap between content and atoms
    bool verified;            // inherited from the oracle's answers
};

// Smallest ball-shaped basis index n with t certified inside ball n and the
// oracle reporting no level-k separation among later refinements of ball n;
// conditions mu on that ball and discretizes the first-factor content to
// slack at most 2^-(k+4).  chi is queried at diag_pair(n, k).  Throws
// SearchDiverged when a verified oracle rejects every index below `fuel`,
// OracleExhausted when an unverified (fuel-bounded) oracle does.
TjurResult tjur_disintegrate(const Measure& mu, const ContinuityBasis& basis, const Point& t,
                             std::size_t k, const EcResult& xi_hat, std::size_t fuel = 1ull << 36);

// The disintegration of mu at t as a single measure on the first factor:
// stage-s lower bounds condition on the ball the level-(s+2) search accepts
// and pay the 2 * 2^-(s+2) localization toll, so the bounds converge to the
// Tjur limit's values.  Accepted balls and their contents are memoized
// across stages; searches run with `fuel_per_level` as in tjur_disintegrate.
// First-factor space must be the naturals.
Measure tjur_limit(const Measure& mu, const ContinuityBasis& basis, const Point& t,
                   const EcResult& xi_hat, std::size_t fuel_per_level = 1ull << 36);

// Locator interface: locate(t, k) returns a ball-shaped basis index n with
// t inside ball n and the conditional content within 2^-k of the
// disintegration at t in the Prokhorov metric.  The bound is the caller's
// certificate; nothing here re-derives it.
struct TjurModulus {
    std::function<std::size_t(const Point&, std::size_t)> locate;
};

struct TaggedMeasure {
    Measure nu;      // conditioned measure on the full product space
    Rational error;  // Prokhorov error tag for its first-factor content
};

// Conditional at the basis ball the modulus picks for precision p + 2,
// tagged with error 2^-p (the locator's bound plus headroom for the limit).
TaggedMeasure modulus_disintegrate(const Measure& mu, const ContinuityBasis& basis,
                                   const TjurModulus& mod, const Point& t, std::size_t p,
                                   std::size_t fuel = 64);

// Fraser-Naderi scheme: balls(t, n) is the stage-n conditioning set of the
// scheme at t (contains t, radii shrink to zero), and comparability is the
// scheme's lower density constant (mass of the stage-n set at least that
// fraction of the enclosing ball's mass).
struct RegularScheme {
    std::function<ContinuitySet(const Point&, std::size_t)> balls;
    Rational comparability;
};

// Raw conditional stream nu(n) = mu conditioned on balls(t, n), memoized per
// stage.  No convergence rate is attached and none is invented: callers who
// hold a rate certificate can feed the stream to their own limit machinery,
// everyone else reads per-term enclosures.  A stage whose conditioning set
// cannot be certified positive throws NullConditioningSet at that stage.
struct FnStream {
    std::function<Measure(std::size_t)> term;
};

FnStream fraser_naderi(const Measure& mu, const RegularScheme& scheme, const Point& t,
                       std::size_t fuel = 64);

// Clopen word cell [w] of Cantor space as a continuity set: the complement
// witness is the finite union of flipped-prefix cylinders, so both sides are
// exact and the boundary is empty.
ContinuitySet word_cset(const Space& cantor_sp, const std::vector<bool>& w);

// Box [wu] x [wv] in a product of two Cantor spaces, with the complement
// streamed as equal-depth boxes (flip a prefix on one side, pad both sides
// to a common depth).  Exact on both sides, like the word cell.
ContinuitySet box_cset(const Space& sq, const std::vector<bool>& wu,
                       const std::vector<bool>& wv);

// Depth-n cells around t: word cells on Cantor space, boxes on a product of
// two Cantor spaces.  Cells are clopen balls of radius 2^(1-n), so the
// density constant is one.
RegularScheme cantor_ball_scheme(const Space& fiber);

} // namespace disint
