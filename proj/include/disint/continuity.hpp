#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "disint/measure.hpp"

namespace disint {

// An open mu-continuity set packaged with a complement witness: v is an open
// subset of the complement of u that exhausts its interior, and the boundary
// between them is mu-null, so mu(u) + mu(v) = 1.  One-sided valuation bounds
// on u and v combine into a two-sided enclosure of mu(u).
struct ContinuitySet {
    OpenSet u;
    OpenSet v;
};

// Certified ball radii for mu, as a deterministic memoized stream: every
// sphere {x : d(x, s_j) = eps_k} is mu-null, for every dense center s_j at
// once.  Candidates are dyadics walked coarse-to-fine (ties broken by
// smaller denominator, then smaller numerator) interleaved with
// odd-denominator windows 1/((2t+3)*2^s); the windows keep the stream dense
// near zero even when an atom at a dyadic point disqualifies every dyadic
// radius.  Skipping is certificate-driven: each emitted radius passes an
// exact sphere-mass check against every family in the measure.
class RadiiStream {
  public:
    explicit RadiiStream(Measure mu) : st_(std::make_shared<State>(std::move(mu))) {}

    Rational at(std::size_t k) const;
    const Measure& measure() const { return st_->mu; }

  private:
    struct State {
        explicit State(Measure m) : mu(std::move(m)) {}
        Measure mu;
        std::mutex lock;
        std::vector<Rational> out;
        std::size_t cursor = 0;  // next raw candidate to examine
    };
    std::shared_ptr<State> st_;
};

RadiiStream continuity_radii(const Measure& mu);

// Countable basis of mu-continuity sets closed under finite intersection:
//   index 2*pair(j, k)      = ball B(s_j, eps_k), witness = inner balls
//                             B(s_j', eps_k') with d(s_j, s_j') > eps_k + eps_k'
//   index 2*pair(a, b) + 1  = intersection of elements a and b
// decompose writes any open set as a countable union of basis balls whose
// union is exactly the set (right inverse of the union operator).
class ContinuityBasis {
  public:
    explicit ContinuityBasis(const Measure& mu) : radii_(mu) {}

    const Measure& measure() const { return radii_.measure(); }
    const RadiiStream& radii() const { return radii_; }

    ContinuitySet set(std::size_t n) const;

    static bool is_ball(std::size_t n) { return n % 2 == 0; }
    static std::size_t ball_index(std::size_t j, std::size_t k) { return 2 * diag_pair(j, k); }
    Ball ball_of(std::size_t n) const;  // pre: is_ball(n)

    // stream of basis indices (with padding) whose balls union to exactly u
    std::function<std::optional<std::size_t>(std::size_t)> decompose(const OpenSet& u) const;

  private:
    RadiiStream radii_;
};

inline ContinuityBasis continuity_basis(const Measure& mu) { return ContinuityBasis(mu); }

// ---- continuity-set algebra ----

ContinuitySet cset_whole(const Space& sp);
// ball with its inner-ball complement witness, radius certified by `radii`
ContinuitySet cset_ball(const RadiiStream& radii, const Ball& b);
ContinuitySet cset_intersect(const ContinuitySet& a, const ContinuitySet& b);
ContinuitySet cset_union(const ContinuitySet& a, const ContinuitySet& b);
// product set with witness (v1 x u2) u (u1 x v2) u (v1 x v2)
ContinuitySet cset_product(const ContinuitySet& a, const ContinuitySet& b);
inline ContinuitySet cset_complement_witness(const ContinuitySet& h) { return {h.v, h.u}; }

// two-sided enclosure of mu(h.u): lower bounds from eval(u), upper bounds
// from 1 - eval(v).  Crossed bounds mean the witness lied.
LocatedReal cset_measure(const Measure& mu, const ContinuitySet& h, long cap = 4096);

// Rebuild a measure from basis-indexed values: eval(U) is the sup of
// values(first n decomposition elements).  Consistency (monotonicity along
// the queried chain, additivity on provably disjoint unions) is checked
// lazily on the unions actually touched.
Measure measure_from_basis(const ContinuityBasis& basis,
                           std::function<LocatedReal(const std::vector<std::size_t>&)> values);

} // namespace disint
