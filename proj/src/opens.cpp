#include <algorithm>
#include <map>
#include <set>

#include "disint/errors.hpp"
#include "disint/space.hpp"

// Open-set algebra on ball streams.  The strategy everywhere: compute the
// exact set-theoretic description of whatever we combine (interval, cylinder,
// singleton, box), emit it as a *single* ball whenever the geometry allows
// (this is the case for all dyadic data, which is the hot path), and fall
// back to a certified dyadic exhaustion stream otherwise.

namespace disint {

std::size_t diag_pair(std::size_t a, std::size_t b) {
    BigInt z = (BigInt(static_cast<unsigned long>(a)) + static_cast<unsigned long>(b));
    z = z * (z + 1) / 2 + static_cast<unsigned long>(b);
    if (!z.fits_ulong_p()) throw ExhaustionError("diagonal index overflow");
    return z.get_ui();
}

void diag_unpair(std::size_t n, std::size_t& a, std::size_t& b) {
    BigInt z(static_cast<unsigned long>(n));
    BigInt r = sqrt(8 * z + 1);
    BigInt w = (r - 1) / 2;
    while (w * (w + 1) / 2 > z) --w;
    while ((w + 1) * (w + 2) / 2 <= z) ++w;
    BigInt y = z - w * (w + 1) / 2;
    BigInt x = w - y;
    a = x.get_ui();
    b = y.get_ui();
}

namespace {

void unpair2_sz(std::size_t n, std::size_t& a, std::size_t& b) { diag_unpair(n, a, b); }

// exact description of the point set a ball (or a meet of balls) carves out
struct FactorSet {
    enum class K { Empty, UnitIv, NatSingle, NatAll, CantorCyl, Prod };
    K k = K::Empty;
    Rational A, B;              // UnitIv: the set is (A,B) intersected with [0,1]
    BigInt n;                   // NatSingle
    std::vector<bool> word;     // CantorCyl
    std::vector<FactorSet> parts;

    static FactorSet empty() { return FactorSet{}; }
};

FactorSet factor_of_ball(const Space& sp, const Ball& b) {
    FactorSet s;
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            Rational c = sp.unit_value(b.center);
            s.k = FactorSet::K::UnitIv;
            s.A = c - b.radius;
            s.B = c + b.radius;
            return s;
        }
        case Space::Kind::Naturals:
            if (b.radius > Rational(1)) {
                s.k = FactorSet::K::NatAll;
            } else {
                s.k = FactorSet::K::NatSingle;
                s.n = b.center;
            }
            return s;
        case Space::Kind::Cantor: {
            auto depth = cantor_ball_depth(b.radius);
            if (!depth) throw ContractError("ball with non-positive radius");
            auto w = sp.cantor_word(b.center);
            w.resize(static_cast<std::size_t>(*depth), false);
            s.k = FactorSet::K::CantorCyl;
            s.word = std::move(w);
            return s;
        }
        case Space::Kind::Product: {
            s.k = FactorSet::K::Prod;
            auto parts = sp.unpair(b.center);
            for (std::size_t i = 0; i < parts.size(); ++i)
                s.parts.push_back(factor_of_ball(sp.factors()[i], Ball{parts[i], b.radius}));
            return s;
        }
    }
    throw UnknownKind("space kind");
}

FactorSet meet_factor(const Space& sp, const FactorSet& x, const FactorSet& y) {
    using K = FactorSet::K;
    if (x.k == K::Empty || y.k == K::Empty) return FactorSet::empty();
    FactorSet s;
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            s.k = K::UnitIv;
            s.A = std::max(x.A, y.A);
            s.B = std::min(x.B, y.B);
            if (s.A >= s.B || s.B <= Rational(0) || s.A >= Rational(1)) return FactorSet::empty();
            return s;
        }
        case Space::Kind::Naturals:
            if (x.k == K::NatAll) return y;
            if (y.k == K::NatAll) return x;
            if (x.n != y.n) return FactorSet::empty();
            return x;
        case Space::Kind::Cantor: {
            const auto& shorter = x.word.size() <= y.word.size() ? x : y;
            const auto& longer = x.word.size() <= y.word.size() ? y : x;
            for (std::size_t i = 0; i < shorter.word.size(); ++i)
                if (shorter.word[i] != longer.word[i]) return FactorSet::empty();
            return longer;
        }
        case Space::Kind::Product: {
            s.k = K::Prod;
            for (std::size_t i = 0; i < sp.factors().size(); ++i) {
                FactorSet m = meet_factor(sp.factors()[i], x.parts[i], y.parts[i]);
                if (m.k == K::Empty) return FactorSet::empty();
                s.parts.push_back(std::move(m));
            }
            return s;
        }
    }
    throw UnknownKind("space kind");
}

// is B(z, r) contained in the set?  exact, aware of clipping at 0 and 1
bool factor_contains_ball(const Space& sp, const FactorSet& s, const Tag& z, const Rational& r) {
    using K = FactorSet::K;
    if (s.k == K::Empty) return false;
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            Rational v = sp.unit_value(z);
            bool lo_ok = (v - r >= s.A) || (v - r < Rational(0) && s.A < Rational(0));
            bool hi_ok = (v + r <= s.B) || (v + r > Rational(1) && s.B > Rational(1));
            return lo_ok && hi_ok;
        }
        case Space::Kind::Naturals:
            if (s.k == K::NatAll) return true;
            return z == s.n && r <= Rational(1);
        case Space::Kind::Cantor: {
            auto depth = cantor_ball_depth(r);
            if (!depth || static_cast<std::size_t>(*depth) < s.word.size()) return false;
            auto w = sp.cantor_word(z);
            for (std::size_t i = 0; i < s.word.size(); ++i)
                if ((i < w.size() && w[i]) != s.word[i]) return false;
            return true;
        }
        case Space::Kind::Product: {
            auto parts = sp.unpair(z);
            for (std::size_t i = 0; i < parts.size(); ++i)
                if (!factor_contains_ball(sp.factors()[i], s.parts[i], parts[i], r)) return false;
            return true;
        }
    }
    throw UnknownKind("space kind");
}

bool set_equal_under(const Space& sp, const FactorSet& s, const Tag& z, const Rational& r);

// exact single-ball representation of the set, if one exists
std::optional<std::pair<Tag, Rational>> factor_single(const Space& sp, const FactorSet& s) {
    using K = FactorSet::K;
    if (s.k == K::Empty) return std::nullopt;
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            if (s.A < Rational(0)) return std::make_pair(Space::unit_tag(Rational(0)), s.B);
            if (s.B > Rational(1)) return std::make_pair(Space::unit_tag(Rational(1)), Rational(1) - s.A);
            Rational mid = (s.A + s.B) / Rational(2);
            if (mid.is_dyadic()) return std::make_pair(Space::unit_tag(mid), (s.B - s.A) / Rational(2));
            return std::nullopt;
        }
        case Space::Kind::Naturals:
            if (s.k == K::NatAll) return std::make_pair(Tag(0), Rational(2));
            return std::make_pair(Tag(s.n), Rational(1));
        case Space::Kind::Cantor:
            return std::make_pair(Space::cantor_tag(s.word),
                                  Rational(3, 2) * Rational::pow2(-static_cast<long>(s.word.size())));
        case Space::Kind::Product: {
            std::vector<Tag> centers;
            Rational r(2);
            for (std::size_t i = 0; i < sp.factors().size(); ++i) {
                auto one = factor_single(sp.factors()[i], s.parts[i]);
                if (!one) return std::nullopt;
                centers.push_back(one->first);
                r = std::min(r, one->second);
            }
            for (std::size_t i = 0; i < centers.size(); ++i)
                if (!set_equal_under(sp.factors()[i], s.parts[i], centers[i], r)) return std::nullopt;
            return std::make_pair(sp.pair(centers), r);
        }
    }
    throw UnknownKind("space kind");
}

// does B(z, r) equal the set exactly?
bool set_equal_under(const Space& sp, const FactorSet& s, const Tag& z, const Rational& r) {
    using K = FactorSet::K;
    if (!factor_contains_ball(sp, s, z, r)) return false;
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            Rational v = sp.unit_value(z);
            bool lo_ok = (s.A >= v - r) || (s.A < Rational(0) && v < r);
            bool hi_ok = (s.B <= v + r) || (s.B > Rational(1) && v + r > Rational(1));
            return lo_ok && hi_ok;
        }
        case Space::Kind::Naturals:
            if (s.k == K::NatAll) return r > Rational(1);
            return r <= Rational(1);
        case Space::Kind::Cantor: {
            auto depth = cantor_ball_depth(r);
            return depth && static_cast<std::size_t>(*depth) == s.word.size();
        }
        case Space::Kind::Product: {
            auto parts = sp.unpair(z);
            for (std::size_t i = 0; i < parts.size(); ++i)
                if (!set_equal_under(sp.factors()[i], s.parts[i], parts[i], r)) return false;
            return true;
        }
    }
    throw UnknownKind("space kind");
}

// certified dyadic exhaustion: diagonal over (dense tag, radius level), keep
// the balls that provably sit inside the set.  Slow but sound; only reached
// when the exact single-ball path fails (non-dyadic geometry).
OpenSet inner_exhaustion(const Space& sp, FactorSet s) {
    auto shared = std::make_shared<FactorSet>(std::move(s));
    return OpenSet(sp, [sp, shared](std::size_t idx) -> std::optional<Ball> {
        std::size_t a, b;
        unpair2_sz(idx, a, b);
        Tag z(static_cast<unsigned long>(a));
        Rational r = Rational::pow2(-static_cast<long>(b) - 1);
        if (factor_contains_ball(sp, *shared, z, r)) return Ball{z, r};
        return std::nullopt;
    });
}

OpenSet set_to_opens(const Space& sp, FactorSet s) {
    if (s.k == FactorSet::K::Empty) return OpenSet::empty(sp);
    if (auto one = factor_single(sp, s))
        return OpenSet::of_balls(sp, {Ball{one->first, one->second}});
    return inner_exhaustion(sp, std::move(s));
}

} // namespace

OpenSet unite(const OpenSet& a, const OpenSet& b) {
    if (!(a.space() == b.space())) throw SpaceMismatch("unite: space mismatch");
    std::optional<std::size_t> fin;
    if (a.finite_bound() && b.finite_bound())
        fin = 2 * std::max(*a.finite_bound(), *b.finite_bound());
    return OpenSet(
        a.space(), [a, b](std::size_t i) { return (i % 2 == 0) ? a.at(i / 2) : b.at(i / 2); },
        fin);
}

OpenSet unite_all(const Space& sp, std::function<OpenSet(std::size_t)> parts) {
    struct Memo {
        std::function<OpenSet(std::size_t)> fn;
        std::map<std::size_t, OpenSet> cache;
    };
    auto memo = std::make_shared<Memo>(Memo{std::move(parts), {}});
    return OpenSet(sp, [memo](std::size_t idx) -> std::optional<Ball> {
        std::size_t u, v;
        unpair2_sz(idx, u, v);
        auto it = memo->cache.find(u);
        if (it == memo->cache.end()) it = memo->cache.emplace(u, memo->fn(u)).first;
        return it->second.at(v);
    });
}

OpenSet meet_balls(const Space& sp, const Ball& b1, const Ball& b2) {
    return set_to_opens(sp, meet_factor(sp, factor_of_ball(sp, b1), factor_of_ball(sp, b2)));
}

OpenSet intersect(const OpenSet& a, const OpenSet& b) {
    if (!(a.space() == b.space())) throw SpaceMismatch("intersect: space mismatch");
    Space sp = a.space();
    struct Memo {
        std::map<std::size_t, OpenSet> cache;
    };
    auto memo = std::make_shared<Memo>();
    return OpenSet(sp, [sp, a, b, memo](std::size_t idx) -> std::optional<Ball> {
        std::size_t p, v;
        unpair2_sz(idx, p, v);
        auto it = memo->cache.find(p);
        if (it == memo->cache.end()) {
            std::size_t i, j;
            unpair2_sz(p, i, j);
            auto ba = a.at(i);
            auto bb = b.at(j);
            OpenSet sub = (ba && bb) ? meet_balls(sp, *ba, *bb) : OpenSet::empty(sp);
            it = memo->cache.emplace(p, std::move(sub)).first;
        }
        return it->second.at(v);
    });
}

OpenSet product_opens(const Space& sp, const OpenSet& a, const OpenSet& b) {
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2 ||
        !(sp.factors()[0] == a.space()) || !(sp.factors()[1] == b.space()))
        throw SpaceMismatch("product_opens: factor mismatch");
    struct Memo {
        std::map<std::size_t, OpenSet> cache;
    };
    auto memo = std::make_shared<Memo>();
    return OpenSet(sp, [sp, a, b, memo](std::size_t idx) -> std::optional<Ball> {
        std::size_t p, v;
        unpair2_sz(idx, p, v);
        auto it = memo->cache.find(p);
        if (it == memo->cache.end()) {
            std::size_t i, j;
            unpair2_sz(p, i, j);
            auto ba = a.at(i);
            auto bb = b.at(j);
            OpenSet sub = (ba && bb) ? cover_box(sp, {{*ba}, {*bb}}) : OpenSet::empty(sp);
            it = memo->cache.emplace(p, std::move(sub)).first;
        }
        return it->second.at(v);
    });
}

OpenSet fatten(const OpenSet& a, const Rational& eps) {
    if (eps < Rational(0)) throw ContractError("fatten by negative amount");
    return OpenSet(
        a.space(),
        [a, eps](std::size_t i) -> std::optional<Ball> {
            auto b = a.at(i);
            if (!b) return std::nullopt;
            return Ball{b->center, b->radius + eps};
        },
        a.finite_bound());
}

OpenSet cover_box(const Space& sp, const std::vector<std::vector<Ball>>& factor_balls) {
    if (sp.kind() != Space::Kind::Product || factor_balls.size() != sp.factors().size())
        throw SpaceMismatch("cover_box arity mismatch");
    // single-ball-per-factor boxes get the exact treatment
    if (std::all_of(factor_balls.begin(), factor_balls.end(),
                    [](const auto& v) { return v.size() == 1; })) {
        FactorSet s;
        s.k = FactorSet::K::Prod;
        for (std::size_t i = 0; i < factor_balls.size(); ++i)
            s.parts.push_back(factor_of_ball(sp.factors()[i], factor_balls[i][0]));
        return set_to_opens(sp, std::move(s));
    }
    std::vector<std::vector<FactorSet>> sets(factor_balls.size());
    for (std::size_t i = 0; i < factor_balls.size(); ++i)
        for (const auto& b : factor_balls[i]) sets[i].push_back(factor_of_ball(sp.factors()[i], b));
    auto shared = std::make_shared<std::vector<std::vector<FactorSet>>>(std::move(sets));
    return OpenSet(sp, [sp, shared](std::size_t idx) -> std::optional<Ball> {
        std::size_t a, b;
        unpair2_sz(idx, a, b);
        Tag z(static_cast<unsigned long>(a));
        Rational r = Rational::pow2(-static_cast<long>(b) - 1);
        auto parts = sp.unpair(z);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            bool inside_some = false;
            for (const auto& s : (*shared)[i])
                if (factor_contains_ball(sp.factors()[i], s, parts[i], r)) {
                    inside_some = true;
                    break;
                }
            if (!inside_some) return std::nullopt;
        }
        return Ball{z, r};
    });
}

namespace {

// m-th point of a radius-r covering net of the space (union of B(z, r) over
// the net is the whole space); nullopt once a finite net is exhausted
std::optional<Tag> cover_net(const Space& sp, const Rational& r, std::size_t m) {
    switch (sp.kind()) {
        case Space::Kind::UnitInterval: {
            long level = cantor_ball_depth(r).value(); // 2^-level < r: grid spacing suffices
            BigInt count = (BigInt(1) << static_cast<unsigned long>(level)) + 1;
            if (BigInt(static_cast<unsigned long>(m)) >= count) return std::nullopt;
            Rational v = Rational(static_cast<long>(m)) * Rational::pow2(-level);
            return Space::unit_tag(v);
        }
        case Space::Kind::Naturals:
            return Tag(static_cast<unsigned long>(m));
        case Space::Kind::Cantor: {
            long depth = cantor_ball_depth(r).value();
            if (depth >= 63 || m >= (std::size_t{1} << depth)) {
                // guard: beyond-finite-net indices (or absurd depth) pad out
                if (depth >= 63) throw ExhaustionError("cover_net: cantor net too deep");
                return std::nullopt;
            }
            std::vector<bool> w(static_cast<std::size_t>(depth));
            for (std::size_t i = 0; i < w.size(); ++i) w[i] = (m >> i) & 1;
            return Space::cantor_tag(w);
        }
        case Space::Kind::Product: {
            std::vector<Tag> parts;
            std::size_t rest = m;
            const auto& fs = sp.factors();
            for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
                std::size_t a, b;
                unpair2_sz(rest, a, b);
                auto t = cover_net(fs[i], r, a);
                if (!t) return std::nullopt;
                parts.push_back(*t);
                rest = b;
            }
            auto t = cover_net(fs.back(), r, rest);
            if (!t) return std::nullopt;
            parts.push_back(*t);
            return sp.pair(parts);
        }
    }
    throw UnknownKind("space kind");
}

} // namespace

OpenSet cylinder_over_second(const Space& product_sp, const OpenSet& u_t) {
    if (product_sp.kind() != Space::Kind::Product || product_sp.factors().size() != 2)
        throw SpaceMismatch("cylinder_over_second wants a binary product");
    if (!(product_sp.factors()[1] == u_t.space()))
        throw SpaceMismatch("cylinder_over_second: second factor mismatch");
    Space s_sp = product_sp.factors()[0];
    // with finitely many base balls, walk the net linearly instead of
    // diagonally -- downstream enumerations stay proportional to net depth
    std::optional<std::size_t> fb = u_t.finite_bound();
    return OpenSet(product_sp, [product_sp, s_sp, u_t, fb](std::size_t idx) -> std::optional<Ball> {
        std::size_t i, m;
        if (fb && *fb > 0) {
            i = idx % *fb;
            m = idx / *fb;
        } else if (fb) {
            return std::nullopt;  // empty base set
        } else {
            unpair2_sz(idx, i, m);
        }
        auto bt = u_t.at(i);
        if (!bt) return std::nullopt;
        // S x B(t, r) = union over an r-net {z} of S of B((z, t), r) in the max metric
        auto z = cover_net(s_sp, bt->radius, m);
        if (!z) return std::nullopt;
        return Ball{product_sp.pair({*z, bt->center}), bt->radius};
    });
}

} // namespace disint
