#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "disint/interval.hpp"

namespace disint {

// A located real is a precision-indexed shrinking sequence of rational
// enclosures: refine(p) has width <= 2^-p and refine(p+1) is contained in
// refine(p).  Generators only have to promise the width bound at each p in
// isolation; nesting is enforced here by intersecting every new enclosure
// into the memoized chain (refine(p) = gen(0) /\ ... /\ gen(p)).  That also
// makes repeated queries cheap and safe to issue from multiple threads.
class LocatedReal {
  public:
    using Gen = std::function<Interval(long)>;

    LocatedReal() : LocatedReal(Rational(0)) {}
    explicit LocatedReal(const Rational& q)
        : LocatedReal([q](long) { return Interval(q); }) {}
    explicit LocatedReal(Gen gen) : st_(std::make_shared<State>(std::move(gen))) {}

    Interval refine(long p) const {
        if (p < 0) p = 0;
        std::scoped_lock lk(st_->mu);
        while ((long)st_->chain.size() <= p) {
            long q = (long)st_->chain.size();
            Interval raw = st_->gen(q);
            if (raw.width() > Rational::pow2(-q))
                throw ContractError("located-real generator broke its width contract");
            st_->chain.push_back(st_->chain.empty() ? raw : meet(st_->chain.back(), raw));
        }
        return st_->chain[p];
    }

    Rational lo(long p) const { return refine(p).lo; }
    Rational hi(long p) const { return refine(p).hi; }

    // ---- arithmetic (each result is again a located real) ----

    friend LocatedReal operator-(const LocatedReal& a) {
        return LocatedReal([a](long p) { return -a.refine(p); });
    }
    friend LocatedReal operator+(const LocatedReal& a, const LocatedReal& b) {
        return LocatedReal([a, b](long p) { return a.refine(p + 1) + b.refine(p + 1); });
    }
    friend LocatedReal operator-(const LocatedReal& a, const LocatedReal& b) {
        return LocatedReal([a, b](long p) { return a.refine(p + 1) - b.refine(p + 1); });
    }
    friend LocatedReal operator*(const LocatedReal& a, const LocatedReal& b) {
        return LocatedReal([a, b](long p) {
            Rational m = a.refine(0).mag() + b.refine(0).mag() + 2;
            long extra = 2;
            while (Rational::pow2(extra) < m) ++extra;  // 2^extra >= |a|+|b|+2
            Interval r = a.refine(p + extra) * b.refine(p + extra);
            for (long q = p + extra + 2; r.width() > Rational::pow2(-p); q += 2)
                r = a.refine(q) * b.refine(q);
            return r;
        });
    }
    friend LocatedReal operator*(const LocatedReal& a, const Rational& c) {
        return LocatedReal([a, c](long p) {
            if (c.sign() == 0) return Interval(Rational(0));
            long extra = 0;
            while (Rational::pow2(extra) < c.abs()) ++extra;
            return a.refine(p + extra) * c;
        });
    }

    // Division insists on seeing the divisor separated from zero within
    // `fuel` precision steps; a divisor that straddles zero forever is the
    // caller's bug, not something to loop on.
    static LocatedReal div(const LocatedReal& a, const LocatedReal& b, long fuel = 256) {
        return LocatedReal([a, b, fuel](long p) {
            long q = 0;
            while (b.refine(q).contains(Rational(0))) {
                if (++q > fuel) throw DivisorStraddlesZero();
            }
            Interval r = a.refine(q) / b.refine(q);
            while (r.width() > Rational::pow2(-p)) {
                q += 2;
                r = a.refine(q) / b.refine(q);
            }
            return r;
        });
    }

    // Enclosure from an arbitrary shrinking-interval process that has no
    // per-step width promise: keep pulling until the width target is met,
    // give up after `cap` pulls.
    static LocatedReal squeeze(std::function<Interval(long)> pull, long cap = 4096,
                               const char* what = "enclosure failed to narrow") {
        return LocatedReal([pull = std::move(pull), cap, what](long p) {
            Interval r = pull(0);
            for (long s = 1; r.width() > Rational::pow2(-p); ++s) {
                if (s > cap) throw EnclosureStall(what);
                r = meet(r, pull(s));
            }
            return r;
        });
    }

  private:
    struct State {
        explicit State(Gen g) : gen(std::move(g)) {}
        Gen gen;
        std::mutex mu;
        std::vector<Interval> chain;
    };
    std::shared_ptr<State> st_;
};

// A lower real: nondecreasing rational lower bounds, value = their sup.
// bound(n) may be "no information yet" (= -infinity) early on.
class LowerReal {
  public:
    using Gen = std::function<std::optional<Rational>(std::size_t)>;

    LowerReal() : LowerReal(Rational(0)) {}
    explicit LowerReal(const Rational& q)
        : LowerReal([q](std::size_t) { return q; }) {}
    explicit LowerReal(Gen gen) : st_(std::make_shared<State>(std::move(gen))) {}

    std::optional<Rational> bound(std::size_t n) const {
        std::scoped_lock lk(st_->mu);
        while (st_->chain.size() <= n) {
            std::optional<Rational> raw = st_->gen(st_->chain.size());
            if (!st_->chain.empty() && st_->chain.back()) {
                // monotone by construction: keep the best bound seen
                if (!raw || *raw < *st_->chain.back()) raw = st_->chain.back();
            }
            st_->chain.push_back(std::move(raw));
        }
        return st_->chain[n];
    }

    Rational bound_or(std::size_t n, const Rational& fallback) const {
        auto b = bound(n);
        return b ? *b : fallback;
    }

    friend LowerReal operator+(const LowerReal& a, const LowerReal& b) {
        return LowerReal([a, b](std::size_t n) -> std::optional<Rational> {
            auto x = a.bound(n), y = b.bound(n);
            if (!x || !y) return std::nullopt;
            return *x + *y;
        });
    }
    friend LowerReal operator*(const LowerReal& a, const Rational& c) {
        if (c.sign() < 0) throw ContractError("scaling a lower real by a negative constant");
        return LowerReal([a, c](std::size_t n) -> std::optional<Rational> {
            auto x = a.bound(n);
            if (!x) return std::nullopt;
            return *x * c;
        });
    }

    // Countable sum of nonnegative lower reals: stage n folds the first n
    // terms at stage n.  Negative stage bounds are clamped; terms are
    // promised nonnegative so 0 is always a sound bound.
    static LowerReal sum(std::function<LowerReal(std::size_t)> term) {
        return LowerReal([term = std::move(term)](std::size_t n) -> std::optional<Rational> {
            Rational acc(0);
            for (std::size_t i = 0; i < n; ++i) {
                auto b = term(i).bound(n);
                if (b && b->sign() > 0) acc += *b;
            }
            return acc;
        });
    }

  private:
    struct State {
        explicit State(Gen g) : gen(std::move(g)) {}
        Gen gen;
        std::mutex mu;
        std::vector<std::optional<Rational>> chain;
    };
    std::shared_ptr<State> st_;
};

// Semidecision outcome: yes carries the stage that certified it, unknown
// carries the fuel that was burned without a certificate.
struct SemiBool {
    bool yes = false;
    std::size_t stage = 0;  // certification stage if yes, fuel spent if not

    static SemiBool certified(std::size_t at) { return {true, at}; }
    static SemiBool unknown(std::size_t fuel) { return {false, fuel}; }
};

// a < b, semidecidable: certified as soon as some precision separates
// a's upper bound from b's lower bound.  One fuel unit = one precision step.
inline SemiBool semidecide_lt(const LocatedReal& a, const LocatedReal& b, std::size_t fuel) {
    for (std::size_t s = 0; s <= fuel; ++s) {
        if (a.hi((long)s) < b.lo((long)s)) return SemiBool::certified(s);
    }
    return SemiBool::unknown(fuel);
}

// a < b with b known from below only (the direction that is sound).
inline SemiBool semidecide_lt(const LocatedReal& a, const LowerReal& b, std::size_t fuel) {
    for (std::size_t s = 0; s <= fuel; ++s) {
        auto bb = b.bound(s);
        if (bb && a.hi((long)s) < *bb) return SemiBool::certified(s);
    }
    return SemiBool::unknown(fuel);
}

inline SemiBool semidecide_gt(const LocatedReal& a, const LocatedReal& b, std::size_t fuel) {
    return semidecide_lt(b, a, fuel);
}

inline SemiBool semidecide_positive(const LowerReal& x, std::size_t fuel) {
    return semidecide_lt(LocatedReal(Rational(0)), x, fuel);
}

} // namespace disint
