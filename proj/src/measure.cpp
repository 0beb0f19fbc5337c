#include "disint/measure.hpp"

#include <algorithm>
#include <array>

#include "disint/errors.hpp"

namespace disint {

namespace {

// ---- sphere-null arithmetic, shared by the families ----

bool is_pow2_at_most_one(const Rational& eps) {
    return eps.num() == 1 && eps.is_dyadic() && eps <= Rational(1);
}

bool dyadic_in_unit(const Rational& q) {
    return q >= Rational(0) && q <= Rational(1) && q.is_dyadic();
}

// every sphere of radius eps around a dense point misses the listed atoms
bool spheres_avoid_atoms(const Space& sp, const std::vector<Tag>& atom_tags, const Rational& eps) {
    switch (sp.kind()) {
        case Space::Kind::UnitInterval:
            for (const Tag& t : atom_tags) {
                Rational a = sp.unit_value(t);
                // |a - s| = eps for a dyadic s in [0,1] iff a-eps or a+eps is one
                if (dyadic_in_unit(a - eps) || dyadic_in_unit(a + eps)) return false;
            }
            return true;
        case Space::Kind::Naturals:
            // the only sphere value is 1, and it always catches some atom
            return atom_tags.empty() || eps != Rational(1);
        case Space::Kind::Cantor:
            // spheres are empty unless eps = 2^-k; at 2^-k they carry cylinders
            return atom_tags.empty() || !is_pow2_at_most_one(eps);
        case Space::Kind::Product: {
            // sphere(s, eps) sits inside the union of per-factor sphere slabs
            const auto& fs = sp.factors();
            std::vector<std::vector<Tag>> proj(fs.size());
            for (const Tag& t : atom_tags) {
                auto parts = sp.unpair(t);
                for (std::size_t k = 0; k < fs.size(); ++k) proj[k].push_back(parts[k]);
            }
            for (std::size_t k = 0; k < fs.size(); ++k)
                if (!spheres_avoid_atoms(fs[k], proj[k], eps)) return false;
            return true;
        }
    }
    throw UnknownKind("space kind");
}

// ---- families ----

struct FiniteDiscreteImpl final : MeasureImpl {
    FiniteAtoms data;

    explicit FiniteDiscreteImpl(FiniteAtoms d) : data(std::move(d)) {
        Rational total(0);
        for (const auto& [t, w] : data.atoms) {
            if (w.sign() <= 0) throw NotNormalized("finite measure with non-positive weight");
            total += w;
        }
        if (total != Rational(1)) throw NotNormalized("finite measure weights sum to " + total.str());
    }

    const Space& space() const override { return data.sp; }

    Rational mass_lower(const std::vector<Ball>& balls, long) const override {
        // atoms are points: the union mass is exact at every stage
        Rational total(0);
        for (const auto& [t, w] : data.atoms)
            for (const auto& b : balls)
                if (data.sp.dense_metric(t, b.center) < b.radius) {
                    total += w;
                    break;
                }
        return total;
    }

    bool radius_good(const Rational& eps) const override {
        std::vector<Tag> tags;
        for (const auto& [t, w] : data.atoms) tags.push_back(t);
        return spheres_avoid_atoms(data.sp, tags, eps);
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        return mass_lower(balls, 0);
    }
};

struct LebesgueUnitImpl final : MeasureImpl {
    const Space& space() const override {
        static Space sp = Space::unit_interval();
        return sp;
    }

    Rational mass_lower(const std::vector<Ball>& balls, long) const override {
        // exact union length of the clipped intervals
        std::vector<std::pair<Rational, Rational>> ivs;
        for (const auto& b : balls) {
            Rational c = space().unit_value(b.center);
            Rational lo = max(Rational(0), c - b.radius);
            Rational hi = min(Rational(1), c + b.radius);
            if (lo < hi) ivs.emplace_back(lo, hi);
        }
        std::sort(ivs.begin(), ivs.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        Rational total(0), cur_hi(0);
        bool open = false;
        Rational cur_lo(0);
        for (const auto& [lo, hi] : ivs) {
            if (!open || lo > cur_hi) {
                if (open) total += cur_hi - cur_lo;
                cur_lo = lo;
                cur_hi = hi;
                open = true;
            } else {
                cur_hi = max(cur_hi, hi);
            }
        }
        if (open) total += cur_hi - cur_lo;
        return total;
    }

    bool radius_good(const Rational& eps) const override { return eps.sign() > 0; } // atomless

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        return mass_lower(balls, 0);
    }
};

std::vector<bool> ball_word(const Space& sp, const Ball& b) {
    auto depth = cantor_ball_depth(b.radius);
    if (!depth) throw ContractError("cantor ball with non-positive radius");
    auto w = sp.cantor_word(b.center);
    w.resize(static_cast<std::size_t>(*depth), false);
    return w;
}

struct CantorUniformImpl final : MeasureImpl {
    const Space& space() const override {
        static Space sp = Space::cantor();
        return sp;
    }

    Rational mass_lower(const std::vector<Ball>& balls, long) const override {
        // exact: cylinders, keep an antichain (drop anything below a kept
        // prefix), sum 2^-depth
        std::vector<std::vector<bool>> words;
        for (const auto& b : balls) words.push_back(ball_word(space(), b));
        std::sort(words.begin(), words.end(),
                  [](const auto& a, const auto& b) { return a.size() < b.size(); });
        std::vector<std::vector<bool>> kept;
        Rational total(0);
        for (const auto& w : words) {
            bool covered = false;
            for (const auto& k : kept) {
                if (k.size() <= w.size() && std::equal(k.begin(), k.end(), w.begin())) {
                    covered = true;
                    break;
                }
            }
            if (!covered) {
                total += Rational::pow2(-static_cast<long>(w.size()));
                kept.push_back(w);
            }
        }
        return total;
    }

    bool radius_good(const Rational& eps) const override {
        return !is_pow2_at_most_one(eps); // spheres at 2^-k carry mass 2^-(k+1)
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        return mass_lower(balls, 0);
    }
};

// maps a factor's balls onto [0,1] intervals measure-isomorphically
// (supported for Lebesgue and uniform-cantor factors)
std::optional<std::pair<Rational, Rational>> ball_as_interval(const MeasureImpl& m, const Ball& b) {
    if (dynamic_cast<const LebesgueUnitImpl*>(&m)) {
        Rational c = m.space().unit_value(b.center);
        Rational lo = max(Rational(0), c - b.radius);
        Rational hi = min(Rational(1), c + b.radius);
        if (lo >= hi) return std::make_pair(Rational(0), Rational(0));
        return std::make_pair(lo, hi);
    }
    if (dynamic_cast<const CantorUniformImpl*>(&m)) {
        auto w = ball_word(m.space(), b);
        Rational lo(0);
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i]) lo += Rational::pow2(-static_cast<long>(i) - 1);
        return std::make_pair(lo, lo + Rational::pow2(-static_cast<long>(w.size())));
    }
    return std::nullopt;
}

Rational rectangle_union_area(std::vector<std::array<Rational, 4>>& rects) {
    // coordinate sweep over x; exact union of y-intervals per slab
    std::vector<Rational> xs;
    for (const auto& r : rects) {
        xs.push_back(r[0]);
        xs.push_back(r[1]);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    Rational area(0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        Rational w = xs[i + 1] - xs[i];
        if (w.sign() <= 0) continue;
        std::vector<std::pair<Rational, Rational>> ys;
        for (const auto& r : rects)
            if (r[0] <= xs[i] && xs[i + 1] <= r[1] && r[2] < r[3]) ys.emplace_back(r[2], r[3]);
        std::sort(ys.begin(), ys.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        Rational len(0), cur_lo(0), cur_hi(0);
        bool open = false;
        for (const auto& [lo, hi] : ys) {
            if (!open || lo > cur_hi) {
                if (open) len += cur_hi - cur_lo;
                cur_lo = lo;
                cur_hi = hi;
                open = true;
            } else {
                cur_hi = max(cur_hi, hi);
            }
        }
        if (open) len += cur_hi - cur_lo;
        area += w * len;
    }
    return area;
}

struct ProductIndependentImpl final : MeasureImpl {
    Space sp;
    Measure first, second;

    ProductIndependentImpl(Measure f, Measure s)
        : sp(Space::product({f.space(), s.space()})), first(std::move(f)), second(std::move(s)) {}

    const Space& space() const override { return sp; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        if (const FiniteAtoms* fa = first.as_finite()) {
            // slice along the discrete first factor
            Rational total(0);
            for (const auto& [t, w] : fa->atoms) {
                std::vector<Ball> slice;
                for (const auto& b : balls) {
                    auto parts = sp.unpair(b.center);
                    if (fa->sp.dense_metric(parts[0], t) < b.radius)
                        slice.push_back(Ball{parts[1], b.radius});
                }
                if (!slice.empty()) total += w * second.mass_lower(slice, stage);
            }
            return total;
        }
        // both factors interval-like: exact rectangle union
        std::vector<std::array<Rational, 4>> rects;
        for (const auto& b : balls) {
            auto parts = sp.unpair(b.center);
            auto ix = ball_as_interval(first.impl(), Ball{parts[0], b.radius});
            auto iy = ball_as_interval(second.impl(), Ball{parts[1], b.radius});
            if (!ix || !iy)
                throw ContractError("product measure over unsupported factor combination");
            rects.push_back({ix->first, ix->second, iy->first, iy->second});
        }
        return rectangle_union_area(rects);
    }

    bool radius_good(const Rational& eps) const override {
        return first.radius_good(eps) && second.radius_good(eps);
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        if (const FiniteAtoms* fa = first.as_finite()) {
            Rational total(0);
            for (const auto& [t, w] : fa->atoms) {
                std::vector<Ball> slice;
                for (const auto& b : balls) {
                    auto parts = sp.unpair(b.center);
                    if (fa->sp.dense_metric(parts[0], t) < b.radius)
                        slice.push_back(Ball{parts[1], b.radius});
                }
                if (slice.empty()) continue;
                auto ex = second.mass_exact(slice);
                if (!ex) return std::nullopt;
                total += w * *ex;
            }
            return total;
        }
        return mass_lower(balls, 0); // the rectangle union is exact
    }

    std::optional<Measure> marginal_second() const override { return second; }
};

struct ConvexCombinationImpl final : MeasureImpl {
    Space sp;
    std::vector<std::pair<Rational, Measure>> parts;

    explicit ConvexCombinationImpl(std::vector<std::pair<Rational, Measure>> p)
        : sp(p.at(0).second.space()), parts(std::move(p)) {
        Rational total(0);
        for (const auto& [w, m] : parts) {
            if (w.sign() <= 0) throw NotNormalized("convex combination with non-positive weight");
            if (!(m.space() == sp)) throw SpaceMismatch("convex combination across spaces");
            total += w;
        }
        if (total != Rational(1)) throw NotNormalized("convex weights sum to " + total.str());
    }

    const Space& space() const override { return sp; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        Rational total(0);
        for (const auto& [w, m] : parts) total += w * m.mass_lower(balls, stage);
        return total;
    }

    bool radius_good(const Rational& eps) const override {
        for (const auto& [w, m] : parts)
            if (!m.radius_good(eps)) return false;
        return true;
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        Rational total(0);
        for (const auto& [w, m] : parts) {
            auto ex = m.mass_exact(balls);
            if (!ex) return std::nullopt;
            total += w * *ex;
        }
        return total;
    }

    std::optional<Measure> marginal_second() const override {
        std::vector<std::pair<Rational, Measure>> ms;
        for (const auto& [w, m] : parts) {
            auto s = m.marginal_second();
            if (!s) return std::nullopt;
            ms.emplace_back(w, *s);
        }
        return Measure::convex(std::move(ms));
    }
};

} // namespace

std::optional<Measure> MeasureImpl::marginal_second() const { return std::nullopt; }

std::optional<Rational> MeasureImpl::mass_exact(const std::vector<Ball>&) const {
    return std::nullopt;
}

LowerReal Measure::eval(const OpenSet& u) const {
    if (!(u.space() == space())) throw SpaceMismatch("eval: open set over the wrong space");
    auto impl = impl_;
    OpenSet uu = u;
    return LowerReal([impl, uu](std::size_t n) -> std::optional<Rational> {
        // quadratic window: diagonal-encoded streams keep balls deep
        std::size_t depth = (n + 1) * (n + 1);
        if (auto fb = uu.finite_bound(); fb && *fb < depth) depth = *fb;
        return impl->mass_lower(uu.prefix(depth), static_cast<long>(n));
    });
}

const FiniteAtoms* Measure::as_finite() const {
    auto* fd = dynamic_cast<const FiniteDiscreteImpl*>(impl_.get());
    return fd ? &fd->data : nullptr;
}

Measure Measure::finite(FiniteAtoms atoms) {
    return Measure(std::make_shared<FiniteDiscreteImpl>(std::move(atoms)));
}

Measure Measure::dirac(const Space& sp, const Tag& at) {
    return finite(FiniteAtoms{sp, {{at, Rational(1)}}});
}

Measure Measure::lebesgue_unit() { return Measure(std::make_shared<LebesgueUnitImpl>()); }

Measure Measure::cantor_uniform() { return Measure(std::make_shared<CantorUniformImpl>()); }

Measure Measure::product(const Measure& first, const Measure& second) {
    return Measure(std::make_shared<ProductIndependentImpl>(first, second));
}

Measure Measure::convex(std::vector<std::pair<Rational, Measure>> parts) {
    return Measure(std::make_shared<ConvexCombinationImpl>(std::move(parts)));
}

LocatedReal tv_on_naturals(const Measure& a, const Measure& b) {
    if (!(a.space() == Space::naturals()) || !(b.space() == Space::naturals()))
        throw SpaceMismatch("tv_on_naturals wants measures on the naturals");
    Measure ma = a, mb = b;
    return LocatedReal::squeeze(
        [ma, mb](long s) {
            long n_atoms = 2 * s + 2;
            long stage = s + 4;
            Rational base(0), got_a(0), got_b(0);
            for (long n = 0; n < n_atoms; ++n) {
                std::vector<Ball> one = {Ball{Tag(n), Rational(1)}};
                Rational la = ma.mass_lower(one, stage);
                Rational lb = mb.mass_lower(one, stage);
                got_a += la;
                got_b += lb;
                base += max(Rational(0), la - lb);
            }
            Rational slack_a = Rational(1) - got_a;
            Rational slack_b = Rational(1) - got_b;
            if (slack_a.sign() < 0 || slack_b.sign() < 0)
                throw ContractError("atom masses exceed total mass");
            return Interval{max(Rational(0), base - slack_b), min(Rational(1), base + slack_a)};
        },
        4096, "total-variation tails failed to shrink");
}

} // namespace disint
