#include <algorithm>
#include <map>
#include <set>

#include "disint/continuity.hpp"
#include "disint/errors.hpp"

// Continuity sets: open sets with mu-null boundary, carried around with an
// explicit open witness for the complement interior.  The witness is what
// makes measures *computable* rather than merely lower-semicomputable: the
// valuation bounds u from below and v from below, and mu(u) + mu(v) = 1
// turns the pair into a shrinking two-sided enclosure.

namespace disint {

namespace {

// Raw radius candidates.  Even slots walk the dyadics coarse-to-fine (ties:
// smaller denominator, then smaller numerator); odd slots walk the
// odd-denominator windows 1/((2t+3)*2^s) diagonally.  The two sources never
// collide (odd denominators are not powers of two), so the stream is
// duplicate-free.
Rational raw_candidate(std::size_t n) {
    if (n % 2 == 0) {
        std::size_t t = n / 2;
        if (t == 0) return Rational(1);
        std::size_t rem = t - 1, level = 1, width = 1;
        while (rem >= width) {
            rem -= width;
            width <<= 1;
            ++level;
        }
        return Rational(BigInt(2 * static_cast<unsigned long>(rem) + 1)) *
               Rational::pow2(-static_cast<long>(level));
    }
    std::size_t s = 0, t = 0;
    diag_unpair((n - 1) / 2, s, t);
    return Rational(BigInt(1), BigInt(2 * static_cast<unsigned long>(t) + 3)) *
           Rational::pow2(-static_cast<long>(s));
}

} // namespace

Rational RadiiStream::at(std::size_t k) const {
    std::scoped_lock lk(st_->lock);
    while (st_->out.size() <= k) {
        std::size_t scanned = 0;
        for (;;) {
            if (++scanned > 200000)
                throw CertificateTimeout(st_->cursor,
                                         "no continuity radius certified within the candidate budget");
            Rational cand = raw_candidate(st_->cursor++);
            if (st_->mu.radius_good(cand)) {
                st_->out.push_back(cand);
                break;
            }
        }
    }
    return st_->out[k];
}

RadiiStream continuity_radii(const Measure& mu) { return RadiiStream(mu); }

ContinuitySet cset_whole(const Space& sp) {
    return {OpenSet::whole(sp), OpenSet::empty(sp)};
}

ContinuitySet cset_ball(const RadiiStream& radii, const Ball& b) {
    Space sp = radii.measure().space();
    OpenSet u = OpenSet::of_balls(sp, {b});
    // complement interior {x : d(x, c) > r}, exhausted by certified inner
    // balls strictly separated from the sphere
    OpenSet v(sp, [radii, b, sp](std::size_t idx) -> std::optional<Ball> {
        std::size_t j = 0, k = 0;
        diag_unpair(idx, j, k);
        Rational eps = radii.at(k);
        Tag sj(static_cast<unsigned long>(j));
        if (sp.dense_metric(b.center, sj) > b.radius + eps) return Ball{sj, eps};
        return std::nullopt;
    });
    return {u, v};
}

ContinuitySet cset_intersect(const ContinuitySet& a, const ContinuitySet& b) {
    if (!(a.u.space() == b.u.space())) throw SpaceMismatch("cset_intersect: space mismatch");
    return {intersect(a.u, b.u), unite(a.v, b.v)};
}

ContinuitySet cset_union(const ContinuitySet& a, const ContinuitySet& b) {
    if (!(a.u.space() == b.u.space())) throw SpaceMismatch("cset_union: space mismatch");
    return {unite(a.u, b.u), intersect(a.v, b.v)};
}

ContinuitySet cset_product(const ContinuitySet& a, const ContinuitySet& b) {
    Space sp = Space::product({a.u.space(), b.u.space()});
    OpenSet u = product_opens(sp, a.u, b.u);
    OpenSet v = unite(unite(product_opens(sp, a.v, b.u), product_opens(sp, a.u, b.v)),
                      product_opens(sp, a.v, b.v));
    return {u, v};
}

LocatedReal cset_measure(const Measure& mu, const ContinuitySet& h, long cap) {
    if (!(mu.space() == h.u.space())) throw SpaceMismatch("cset_measure: space mismatch");
    LowerReal under = mu.eval(h.u);
    LowerReal over = mu.eval(h.v);
    // Exactness shortcut: when either side is a finite union whose mass the
    // family computes in closed form, mu(u) + mu(v) = 1 pins the value from
    // both directions at once.  The other side still gets cross-checked so a
    // lying witness is caught, not silently trusted.
    std::optional<Rational> exact_u, exact_v;
    if (auto fb = h.u.finite_bound()) exact_u = mu.mass_exact(h.u.prefix(*fb));
    if (auto fb = h.v.finite_bound()) exact_v = mu.mass_exact(h.v.prefix(*fb));
    if (exact_u && exact_v) {
        if (*exact_u + *exact_v != Rational(1))
            throw WitnessInconsistent("witness masses sum to " + (*exact_u + *exact_v).str() +
                                      ", not 1");
        return LocatedReal(*exact_u);
    }
    if (exact_u) {
        if (over.bound_or(4, Rational(0)) > Rational(1) - *exact_u)
            throw WitnessInconsistent("witness mass exceeds the complement's");
        return LocatedReal(*exact_u);
    }
    if (exact_v) {
        if (under.bound_or(4, Rational(0)) > Rational(1) - *exact_v)
            throw WitnessInconsistent("set mass exceeds the witness complement's");
        return LocatedReal(Rational(1) - *exact_v);
    }
    return LocatedReal::squeeze(
        [under, over](long s) {
            std::size_t n = static_cast<std::size_t>(s);
            Rational lo = max(Rational(0), under.bound_or(n, Rational(0)));
            Rational hi = Rational(1) - max(Rational(0), over.bound_or(n, Rational(0)));
            if (lo > hi)
                throw WitnessInconsistent("continuity-set bounds crossed: witness overlaps the set");
            return Interval(lo, hi);
        },
        cap, "continuity-set enclosure failed to narrow");
}

ContinuitySet ContinuityBasis::set(std::size_t n) const {
    if (is_ball(n)) return cset_ball(radii_, ball_of(n));
    std::size_t a = 0, b = 0;
    diag_unpair((n - 1) / 2, a, b);
    return cset_intersect(set(a), set(b));
}

Ball ContinuityBasis::ball_of(std::size_t n) const {
    std::size_t j = 0, k = 0;
    diag_unpair(n / 2, j, k);
    return Ball{Tag(static_cast<unsigned long>(j)), radii_.at(k)};
}

namespace {

// How far to scan the radii stream when looking for an exact radius match.
constexpr std::size_t kSharpScan = 20000;

// If the ball is *exactly* a basis ball (certified radius, tag-sized
// center), return its basis index.  This is the fast path that makes
// decompositions of dyadic probes converge geometrically instead of at the
// diagonal's crawl.
std::optional<std::size_t> sharp_index(const RadiiStream& radii, const Ball& b,
                                       std::map<Rational, std::optional<std::size_t>>& cache) {
    if (b.radius > Rational(1)) return std::nullopt;  // whole-space ball: no single match
    if (!b.center.fits_ulong_p()) return std::nullopt;
    auto it = cache.find(b.radius);
    if (it == cache.end()) {
        std::optional<std::size_t> found;
        for (std::size_t k = 0; k < kSharpScan; ++k)
            if (radii.at(k) == b.radius) {
                found = k;
                break;
            }
        it = cache.emplace(b.radius, found).first;
    }
    if (!it->second) return std::nullopt;
    return ContinuityBasis::ball_index(static_cast<std::size_t>(b.center.get_ui()), *it->second);
}

} // namespace

std::function<std::optional<std::size_t>(std::size_t)>
ContinuityBasis::decompose(const OpenSet& u) const {
    if (!(u.space() == measure().space())) throw SpaceMismatch("decompose: space mismatch");
    RadiiStream radii = radii_;
    Space sp = measure().space();
    auto cache = std::make_shared<std::map<Rational, std::optional<std::size_t>>>();
    auto lock = std::make_shared<std::mutex>();
    return [radii, u, sp, cache, lock](std::size_t idx) -> std::optional<std::size_t> {
        // Even slots: one shot per stream ball at an exact basis match.
        // Odd slots: the exhaustive diagonal over (ball, center, radius).
        if (idx % 2 == 0) {
            auto bu = u.at(idx / 2);
            if (!bu) return std::nullopt;
            std::scoped_lock lk(*lock);
            return sharp_index(radii, *bu, *cache);
        }
        std::size_t i = 0, m = 0, j = 0, k = 0;
        diag_unpair(idx / 2, i, m);
        diag_unpair(m, j, k);
        auto bu = u.at(i);
        if (!bu) return std::nullopt;
        Rational eps = radii.at(k);
        Tag sj(static_cast<unsigned long>(j));
        if (sp.dense_metric(bu->center, sj) + eps <= bu->radius) return 2 * diag_pair(j, k);
        return std::nullopt;
    };
}

namespace {

class BasisMeasureImpl : public MeasureImpl {
  public:
    BasisMeasureImpl(ContinuityBasis basis,
                     std::function<LocatedReal(const std::vector<std::size_t>&)> values)
        : basis_(std::move(basis)), values_(std::move(values)) {}

    const Space& space() const override { return basis_.measure().space(); }
    bool radius_good(const Rational& eps) const override {
        return basis_.measure().radius_good(eps);
    }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        if (balls.empty() || stage < 0) return Rational(0);
        auto dec = basis_.decompose(OpenSet::of_balls(space(), balls));
        std::set<std::size_t> collected;
        std::size_t window =
            (static_cast<std::size_t>(stage) + 1) * (static_cast<std::size_t>(stage) + 1);
        for (std::size_t i = 0; i < window; ++i)
            if (auto n = dec(i)) collected.insert(*n);
        if (collected.empty()) return Rational(0);
        std::vector<std::size_t> query(collected.begin(), collected.end());
        LocatedReal val = values_(query);
        check(query, val);
        return max(Rational(0), val.lo(stage + 2));
    }

  private:
    static constexpr long kCheckPrec = 6;

    // Lazy consistency checks on the unions actually queried: the value map
    // must be monotone under inclusion and additive across provably disjoint
    // balls.  Violations are certified (enclosures fail to overlap), never
    // guesses.
    void check(const std::vector<std::size_t>& query, const LocatedReal& val) const {
        Interval enc = val.refine(kCheckPrec);
        {
            std::scoped_lock lk(lock_);
            if (seen_.count(query)) return;
            for (const auto& [prev, prev_enc] : seen_) {
                bool prev_subset =
                    std::includes(query.begin(), query.end(), prev.begin(), prev.end());
                bool query_subset =
                    std::includes(prev.begin(), prev.end(), query.begin(), query.end());
                if ((prev_subset && prev_enc.lo > enc.hi) ||
                    (query_subset && enc.lo > prev_enc.hi))
                    throw InconsistentValues("basis values not monotone under union inclusion");
            }
        }
        if (query.size() >= 2 && query.size() <= 4 && pairwise_disjoint(query)) {
            Interval total(Rational(0));
            for (std::size_t n : query) total = total + values_({n}).refine(kCheckPrec);
            if (enc.lo > total.hi || total.lo > enc.hi)
                throw InconsistentValues("basis values not additive on a disjoint union");
        }
        std::scoped_lock lk(lock_);
        if (seen_.size() < 64) seen_.emplace(query, enc);
    }

    bool pairwise_disjoint(const std::vector<std::size_t>& query) const {
        const Space& sp = space();
        for (std::size_t x = 0; x < query.size(); ++x)
            for (std::size_t y = x + 1; y < query.size(); ++y) {
                Ball a = basis_.ball_of(query[x]);
                Ball b = basis_.ball_of(query[y]);
                if (sp.dense_metric(a.center, b.center) < a.radius + b.radius) return false;
            }
        return true;
    }

    ContinuityBasis basis_;
    std::function<LocatedReal(const std::vector<std::size_t>&)> values_;
    mutable std::mutex lock_;
    mutable std::map<std::vector<std::size_t>, Interval> seen_;
};

} // namespace

Measure measure_from_basis(const ContinuityBasis& basis,
                           std::function<LocatedReal(const std::vector<std::size_t>&)> values) {
    return Measure(std::make_shared<BasisMeasureImpl>(basis, std::move(values)));
}

} // namespace disint
