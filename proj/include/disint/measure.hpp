#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "disint/space.hpp"

namespace disint {

class Measure;

// Backend of a measure-as-valuation.  The one obligation that matters:
// mass_lower(balls, stage) is a sound rational lower bound on mu(union of
// balls) that converges to the true mass as the prefix and stage grow.
// Everything user-facing (LowerReal valuations, conditionals, distances)
// is assembled from that plus a handful of exact structural facts.
struct MeasureImpl {
    virtual ~MeasureImpl() = default;

    virtual const Space& space() const = 0;
    virtual Rational mass_lower(const std::vector<Ball>& balls, long stage) const = 0;

    // Is every sphere {x : d(x, s_j) = eps} mu-null for every dense center
    // s_j?  Decidable by closed-form arithmetic for every family here; this
    // is what certifies a radius for the continuity subbasis.
    virtual bool radius_good(const Rational& eps) const = 0;

    // Exact mass of a finite union of open balls, when the family admits a
    // closed form (all concrete families do; derived measures usually not).
    virtual std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const;

    // Exact second-factor marginal for measures on binary products, when a
    // closed form exists (it does for every family this library builds).
    virtual std::optional<Measure> marginal_second() const;
};

// finitely supported rational measure: atoms at dense points
struct FiniteAtoms {
    Space sp;
    std::vector<std::pair<Tag, Rational>> atoms; // weights > 0, sum exactly 1
};

class Measure {
  public:
    explicit Measure(std::shared_ptr<const MeasureImpl> impl) : impl_(std::move(impl)) {}

    const Space& space() const { return impl_->space(); }
    Rational mass_lower(const std::vector<Ball>& balls, long stage) const {
        return impl_->mass_lower(balls, stage);
    }
    bool radius_good(const Rational& eps) const { return impl_->radius_good(eps); }
    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const {
        return impl_->mass_exact(balls);
    }
    std::optional<Measure> marginal_second() const { return impl_->marginal_second(); }
    const MeasureImpl& impl() const { return *impl_; }
    std::shared_ptr<const MeasureImpl> impl_ptr() const { return impl_; }

    // valuation: monotone lower approximations converging to mu(U)
    LowerReal eval(const OpenSet& u) const;

    // nullptr unless this is a finite discrete measure
    const FiniteAtoms* as_finite() const;

    static Measure finite(FiniteAtoms atoms);
    static Measure dirac(const Space& sp, const Tag& at);
    static Measure lebesgue_unit();
    static Measure cantor_uniform();
    static Measure product(const Measure& first, const Measure& second);
    static Measure convex(std::vector<std::pair<Rational, Measure>> parts);

  private:
    std::shared_ptr<const MeasureImpl> impl_;
};

inline LowerReal eval_valuation(const Measure& mu, const OpenSet& u) { return mu.eval(u); }

// Total-variation distance between two measures on the naturals, which on a
// discrete metric space coincides with the Prokhorov distance.  Atom masses
// are pinned from below by the valuation and from above by the mass deficit,
// so the enclosure is sound and shrinks as the tails are swept up.
LocatedReal tv_on_naturals(const Measure& a, const Measure& b);

} // namespace disint
