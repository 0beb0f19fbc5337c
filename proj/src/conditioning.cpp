#include "disint/conditioning.hpp"
#include "disint/errors.hpp"

#include <mutex>
#include <optional>

namespace disint {

namespace {

class ConditionedImpl : public MeasureImpl {
  public:
    ConditionedImpl(Measure base, ContinuitySet h, LocatedReal denom,
                    std::optional<ContinuitySet> fiber, std::size_t fuel)
        : base_(std::move(base)),
          h_(std::move(h)),
          denom_(std::move(denom)),
          fiber_(std::move(fiber)),
          fuel_(fuel) {}

    const Space& space() const override { return base_.space(); }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        if (balls.empty() || stage < 0) return Rational(0);
        // meet every probe ball against the conditioning stream directly; the
        // generic intersect would stack two diagonal enumerations and push the
        // useful meets quadratically far out
        std::size_t depth = (static_cast<std::size_t>(stage) + 1) *
                            (static_cast<std::size_t>(stage) + 1);
        std::vector<Ball> cut;
        for (const Ball& b : balls) {
            for (std::size_t j = 0; j < depth; ++j) {
                auto c = h_.u.at(j);
                if (!c) continue;
                for (const Ball& m :
                     meet_balls(space(), b, *c).prefix(static_cast<std::size_t>(stage) + 2))
                    cut.push_back(m);
            }
        }
        if (cut.empty()) return Rational(0);
        // Absolute precision on the base measure is useless when the
        // conditioning set itself is tiny: a ratio good to 2^-stage needs the
        // numerator good to den * 2^-stage, so shift base queries by the
        // denominator's magnitude.
        long shift = denom_scale();
        Rational num = max(Rational(0), base_.mass_lower(cut, stage + shift));
        Rational den = denom_.hi(stage + 2 + shift);
        if (den.sign() <= 0) throw ContractError("conditioning denominator collapsed to zero");
        return min(Rational(1), num / den);
    }

    // sound: the conditioned measure is absolutely continuous wrt the base
    bool radius_good(const Rational& eps) const override { return base_.radius_good(eps); }

    std::optional<Measure> marginal_second() const override {
        if (!fiber_) return std::nullopt;
        auto base_marginal = base_.marginal_second();
        if (!base_marginal) return std::nullopt;
        return condition(*base_marginal, *fiber_, fuel_);
    }

  private:
    // Smallest s with denom >= 2^-s, resolved once.  Exact denominators (the
    // closed-form marginal path) answer at the first probe; squeezed ones pay
    // one refinement of depth ~ -log2(denom).
    long denom_scale() const {
        std::lock_guard<std::mutex> lock(scale_mutex_);
        if (scale_) return *scale_;
        Rational lo(0);
        for (long p = 4;; p *= 2) {
            lo = denom_.lo(p);
            if (lo.sign() > 0) break;
            if (p > (1l << 20))
                throw EnclosureStall("conditioning denominator scale never resolved");
        }
        long s = 0;
        while (Rational::pow2(-s) > lo) ++s;
        scale_ = s;
        return s;
    }

    Measure base_;
    ContinuitySet h_;
    LocatedReal denom_;
    std::optional<ContinuitySet> fiber_;
    std::size_t fuel_;
    mutable std::mutex scale_mutex_;
    mutable std::optional<long> scale_;
};

// The positivity gate: first valuation stage n whose lower bound beats 2^-n.
void certify_positive(const LowerReal& under, std::size_t fuel, const char* what) {
    for (std::size_t n = 0; n <= fuel; ++n) {
        auto b = under.bound(n);
        if (b && *b > Rational::pow2(-static_cast<long>(n))) return;
    }
    throw NullConditioningSet(what);
}

} // namespace

Measure condition(const Measure& mu, const ContinuitySet& h, std::size_t fuel) {
    if (!(mu.space() == h.u.space())) throw SpaceMismatch("condition: space mismatch");
    certify_positive(mu.eval(h.u), fuel, "conditioning set never certified positive within fuel");
    return Measure(
        std::make_shared<ConditionedImpl>(mu, h, cset_measure(mu, h), std::nullopt, fuel));
}

Measure condition_fiber(const Measure& mu, const ContinuitySet& u_t, std::size_t fuel) {
    const Space& sp = mu.space();
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2 ||
        !(sp.factors()[1] == u_t.u.space()))
        throw SpaceMismatch("condition_fiber: needs a binary product whose second factor matches");
    ContinuitySet h{cylinder_over_second(sp, u_t.u), cylinder_over_second(sp, u_t.v)};
    // mu(S x U) equals the second marginal's mass of U; when the marginal
    // has a closed form this gives a far tighter denominator than the
    // cylinder streams can.
    if (auto marg = mu.marginal_second()) {
        certify_positive(marg->eval(u_t.u), fuel,
                         "conditioning fiber never certified positive within fuel");
        return Measure(
            std::make_shared<ConditionedImpl>(mu, h, cset_measure(*marg, u_t), u_t, fuel));
    }
    certify_positive(mu.eval(h.u), fuel,
                     "conditioning fiber never certified positive within fuel");
    return Measure(std::make_shared<ConditionedImpl>(mu, h, cset_measure(mu, h), u_t, fuel));
}

} // namespace disint
