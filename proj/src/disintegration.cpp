#include "disint/disintegration.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "disint/constructions.hpp"
#include "disint/errors.hpp"

namespace disint {

namespace {

const Space& second_factor(const Measure& mu) {
    const Space& sp = mu.space();
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2)
        throw SpaceMismatch("disintegration needs a measure on a two-factor product");
    return sp.factors()[1];
}

class FirstMarginalNaturals final : public MeasureImpl {
  public:
    explicit FirstMarginalNaturals(Measure base) : base_(std::move(base)), nat_(Space::naturals()) {
        const Space& sp = base_.space();
        if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2 ||
            sp.factors()[0].kind() != Space::Kind::Naturals)
            throw SpaceMismatch("first-factor content needs a measure on product(naturals, T)");
    }

    const Space& space() const override { return nat_; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        std::vector<Ball> cyl;
        if (!translate(balls, cyl)) return base_.mass_lower({whole_ball()}, stage);
        if (cyl.empty()) return Rational(0);
        return base_.mass_lower(cyl, stage);
    }

    bool radius_good(const Rational& eps) const override {
        // discrete metric: every sphere is empty except at radius one
        return eps != Rational(1);
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        std::vector<Ball> cyl;
        if (!translate(balls, cyl)) return base_.mass_exact({whole_ball()});
        if (cyl.empty()) return Rational(0);
        return base_.mass_exact(cyl);
    }

  private:
    static Ball whole_ball() { return Ball{Tag(0), Rational(2)}; }

    // false when some probe ball covers the whole line
    bool translate(const std::vector<Ball>& balls, std::vector<Ball>& out) const {
        for (const Ball& b : balls) {
            if (b.radius > Rational(1)) return false;
            if (b.radius.sign() <= 0) continue;
            if (!b.center.fits_ulong_p())
                throw ContractError("content probe beyond addressable rows");
            for (const Ball& c : row_balls(b.center.get_ui())) out.push_back(c);
        }
        return true;
    }

    const std::vector<Ball>& row_balls(unsigned long n) const {
        std::scoped_lock lk(lock_);
        auto it = rows_.find(n);
        if (it != rows_.end()) return it->second;
        OpenSet u = row_cylinder(base_.space(), n);
        std::size_t cap = u.finite_bound() ? *u.finite_bound() : 64;
        return rows_.emplace(n, u.prefix(cap)).first->second;
    }

    Measure base_;
    Space nat_;
    mutable std::mutex lock_;
    mutable std::map<unsigned long, std::vector<Ball>> rows_;
};

} // namespace

Measure marginal_first_naturals(const Measure& mu) {
    return Measure(std::make_shared<FirstMarginalNaturals>(mu));
}

FiniteAtoms finite_conditional_content(const FiniteAtoms& base, const ContinuitySet& h,
                                       std::size_t scan) {
    const Space& sp = base.sp;
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2 ||
        sp.factors()[0].kind() != Space::Kind::Naturals)
        throw SpaceMismatch("conditional content needs atoms on product(naturals, T)");
    if (!(h.u.space() == sp.factors()[1]))
        throw SpaceMismatch("conditioning set lives on the wrong space");

    auto inside = [&](const OpenSet& u, const Tag& second) -> bool {
        const Space& tsp = u.space();
        std::size_t cap = scan;
        if (auto fb = u.finite_bound()) cap = std::min(cap, *fb);
        for (std::size_t i = 0; i < cap; ++i) {
            auto b = u.at(i);
            if (!b) continue;
            if (b->radius > Rational(1)) return true;
            if (tsp.dense_metric(b->center, second) < b->radius) return true;
        }
        return false;
    };

    std::map<unsigned long, Rational> rows;
    Rational total(0);
    for (const auto& [tag, w] : base.atoms) {
        std::vector<Tag> parts = sp.unpair(tag);
        bool in_u = inside(h.u, parts[1]);
        if (!in_u && !inside(h.v, parts[1]))
            throw ContractError("atom undecided by the conditioning set and its witness");
        if (!in_u) continue;
        if (!parts[0].fits_ulong_p()) throw ContractError("atom row beyond addressable range");
        rows[parts[0].get_ui()] += w;
        total += w;
    }
    if (total.sign() <= 0) throw NullConditioningSet("conditioning set misses every atom");

    FiniteAtoms out{Space::naturals(), {}};
    for (const auto& [r, w] : rows) out.atoms.emplace_back(Tag(r), w / total);
    return out;
}

DiscreteApproximant discretize_naturals(const Measure& m, long precision, std::size_t row_cap) {
    if (m.space().kind() != Space::Kind::Naturals)
        throw SpaceMismatch("discretization wants a measure on the naturals");
    if (const FiniteAtoms* fa = m.as_finite()) return {*fa, Rational(0)};

    Rational target = Rational::pow2(-precision);
    long stage = precision + 2;
    std::size_t rows = 16;
    for (int round = 0; round < 48; ++round) {
        std::vector<Rational> w(rows, Rational(0));
        Rational got(0);
        for (std::size_t i = 0; i < rows; ++i) {
            std::vector<Ball> probe{Ball{Tag(static_cast<unsigned long>(i)), Rational(1)}};
            if (auto ex = m.mass_exact(probe))
                w[i] = *ex;
            else
                w[i] = max(Rational(0), m.mass_lower(probe, stage));
            got += w[i];
        }
        Rational residual = Rational(1) - got;
        if (residual <= target) {
            std::size_t heaviest = 0;
            for (std::size_t i = 1; i < rows; ++i)
                if (w[i] > w[heaviest]) heaviest = i;
            w[heaviest] += residual; // fold the unresolved tail; moves at most `residual`
            FiniteAtoms out{Space::naturals(), {}};
            for (std::size_t i = 0; i < rows; ++i)
                if (w[i].sign() > 0) out.atoms.emplace_back(Tag(static_cast<unsigned long>(i)), w[i]);
            return {std::move(out), residual};
        }
        stage += 2;
        rows = std::min(row_cap, rows + rows / 2 + 4);
    }
    throw EnclosureStall("finite approximant tail failed to close at the requested precision");
}

namespace {

struct TjurCache {
    struct Slot {
        std::size_t fuel = 0;
        bool tried = false;
        std::optional<Measure> content;
    };
    std::map<std::size_t, Slot> content;
    std::map<std::pair<std::size_t, std::size_t>, LocatedReal> dist;
};

struct Caps {
    std::size_t idx_cap;
    std::size_t k_cap;
    std::size_t cond_fuel;
    long depth;
};

Caps caps_for(std::size_t fuel) {
    return {fuel / 2 + 1, fuel / 3 + 1, fuel + 8, static_cast<long>(fuel / 6) + 2};
}

// walk refining ball pairs below the caps and hand every certified
// separation (inner m, outer n, level k) to the sink
void collect_triples(const Measure& mu, const ContinuityBasis& basis, const Caps& cp,
                     TjurCache& cache,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& sink) {
    const Space& tsp = second_factor(mu);

    std::vector<std::size_t> idx;
    std::vector<Ball> geo;
    for (std::size_t n = 0; n < cp.idx_cap; ++n) {
        if (!ContinuityBasis::is_ball(n)) continue;
        idx.push_back(n);
        geo.push_back(basis.ball_of(n));
    }

    auto content_of = [&](std::size_t n) -> const std::optional<Measure>& {
        TjurCache::Slot& slot = cache.content[n];
        if (!slot.tried || (!slot.content && cp.cond_fuel > slot.fuel)) {
            slot.tried = true;
            slot.fuel = cp.cond_fuel;
            try {
                slot.content =
                    marginal_first_naturals(condition_fiber(mu, basis.set(n), cp.cond_fuel));
            } catch (const NullConditioningSet&) {
                slot.content.reset(); // not certified positive at this fuel; retry later
            } catch (const EnclosureStall&) {
                slot.content.reset();
            }
        }
        return slot.content;
    };

    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            // inner = higher index m, outer = lower index n
            if (!ball_contains(tsp, geo[a], geo[b])) continue;
            const std::optional<Measure>& cm = content_of(idx[b]);
            if (!cm) continue;
            const std::optional<Measure>& cn = content_of(idx[a]);
            if (!cn) continue;
            try {
                auto key = std::make_pair(idx[b], idx[a]);
                auto it = cache.dist.find(key);
                if (it == cache.dist.end())
                    it = cache.dist.emplace(key, tv_on_naturals(*cm, *cn)).first;
                Interval e = it->second.refine(cp.depth);
                for (std::size_t k = 0; k <= cp.k_cap; ++k)
                    if (e.lo > Rational::pow2(-static_cast<long>(k))) sink(idx[b], idx[a], k);
            } catch (const EnclosureStall&) {
                continue; // no certificate from this pair at this budget
            }
        }
    }
}

} // namespace

std::set<std::array<std::size_t, 3>> tjur_distance_triples(const Measure& mu,
                                                           const ContinuityBasis& basis,
                                                           std::size_t fuel) {
    std::set<std::array<std::size_t, 3>> out;
    TjurCache cache;
    collect_triples(mu, basis, caps_for(fuel), cache,
                    [&](std::size_t m, std::size_t n, std::size_t k) { out.insert({m, n, k}); });
    return out;
}

Enumeration xi_enumeration(const Measure& mu, const ContinuityBasis& basis) {
    struct Shared {
        std::mutex lock;
        TjurCache cache;
    };
    auto sh = std::make_shared<Shared>();
    Measure m = mu;
    ContinuityBasis b = basis;
    return Enumeration([m, b, sh](std::size_t stage) {
        std::scoped_lock lk(sh->lock);
        std::set<unsigned long> out;
        collect_triples(m, b, caps_for(stage), sh->cache,
                        [&](std::size_t, std::size_t n, std::size_t k) {
                            out.insert(static_cast<unsigned long>(diag_pair(n, k)));
                        });
        return out;
    });
}

namespace {

// bits(1/r) for a positive radius: the precision scale a ball of radius r
// forces on point names and conditioning fuel
std::size_t radius_bits(const Rational& r) {
    std::size_t bn = mpz_sizeinbase(r.num().get_mpz_t(), 2);
    std::size_t bd = mpz_sizeinbase(r.den().get_mpz_t(), 2);
    return bd > bn ? bd - bn + 1 : 1;
}

// One candidate ball per radius index, centered at the point's canonical
// name at that radius' own scale: d(t, s_j) <= 2^-(p-1) < r holds by
// construction, so the membership certificate is free and the stream still
// holds balls of every certified radius around the point.  Scanning all
// center/radius pairs instead would visit quadratically many containing
// balls of large radius before the first useful one.
class CenteredScan {
  public:
    CenteredScan(const ContinuityBasis& basis, const Point& t) : basis_(basis), t_(t) {}

    struct Candidate {
        std::size_t index;  // basis index 2 * pair(center tag, radius index)
        Ball ball;
    };

    // candidate at radius index k; nullopt when the point's name or the
    // ball's basis index does not fit the index space at that depth
    const std::optional<Candidate>& at(std::size_t k) {
        while (memo_.size() <= k) {
            std::size_t i = memo_.size();
            Rational r = basis_.radii().at(i);
            long p = static_cast<long>(radius_bits(r)) + 8;
            Tag name = t_.at(p);
            if (!name.fits_ulong_p()) {
                memo_.push_back(std::nullopt);
                continue;
            }
            try {
                std::size_t n = ContinuityBasis::ball_index(name.get_ui(), i);
                memo_.push_back(Candidate{n, Ball{name, r}});
            } catch (const ExhaustionError&) {
                memo_.push_back(std::nullopt);
            }
        }
        return memo_[k];
    }

  private:
    ContinuityBasis basis_;
    Point t_;
    std::vector<std::optional<Candidate>> memo_;
};

struct Accepted {
    std::size_t index;
    Measure content;  // first-factor content of the accepted conditional
};

Accepted accept_index(const Measure& mu, const ContinuityBasis& basis, CenteredScan& scan,
                      std::size_t k, const EcResult& xi_hat, std::size_t fuel) {
    for (std::size_t i = 0; i * i + 3 * i < fuel; ++i) {
        const auto& c = scan.at(i);
        if (!c || c->index >= fuel) continue;
        bool separated = true;
        try {
            separated = xi_hat.chi(static_cast<unsigned long>(diag_pair(c->index, k)));
        } catch (const ExhaustionError&) {
            // separation codes beyond the index space count as uncertified
        }
        if (separated) continue;
        // positivity certification digs to the window's own mass scale
        std::size_t cfuel = std::max<std::size_t>(64, radius_bits(c->ball.radius) + 32);
        try {
            Measure cond = condition_fiber(mu, basis.set(c->index), cfuel);
            return {c->index, marginal_first_naturals(cond)};
        } catch (const NullConditioningSet&) {
            continue;  // mass not certified positive yet; a finer ball will be
        }
    }
    if (!xi_hat.verified)
        throw OracleExhausted("fuel-bounded separation oracle rejected every candidate ball");
    throw SearchDiverged("no certified ball containing the point passed the separation check");
}

class TjurLimitImpl final : public MeasureImpl {
  public:
    TjurLimitImpl(Measure mu, ContinuityBasis basis, Point t, EcResult xi, std::size_t fuel)
        : mu_(std::move(mu)),
          basis_(std::move(basis)),
          t_(std::move(t)),
          xi_(std::move(xi)),
          fuel_(fuel),
          nat_(Space::naturals()),
          scan_(basis_, t_) {}

    const Space& space() const override { return nat_; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        if (balls.empty() || stage < 0) return Rational(0);
        // level-(stage+2) window content is within 2 * 2^-(stage+2) of the
        // limit in total variation, hence on every probe set
        Measure c = content_at(stage + 2);
        Rational raw = c.mass_lower(balls, stage + 2) - Rational::pow2(-stage - 1);
        return max(Rational(0), min(Rational(1), raw));
    }

    bool radius_good(const Rational& eps) const override { return eps != Rational(1); }

  private:
    Measure content_at(long level) const {
        std::lock_guard<std::mutex> lock(lock_);
        auto it = levels_.find(level);
        if (it == levels_.end()) {
            Accepted a = accept_index(mu_, basis_, scan_, static_cast<std::size_t>(level), xi_,
                                      fuel_);
            it = levels_.emplace(level, std::move(a.content)).first;
        }
        return it->second;
    }

    Measure mu_;
    ContinuityBasis basis_;
    Point t_;
    EcResult xi_;
    std::size_t fuel_;
    Space nat_;
    mutable std::mutex lock_;
    mutable CenteredScan scan_;
    mutable std::map<long, Measure> levels_;
};

} // namespace

TjurResult tjur_disintegrate(const Measure& mu, const ContinuityBasis& basis, const Point& t,
                             std::size_t k, const EcResult& xi_hat, std::size_t fuel) {
    const Space& tsp = second_factor(mu);
    if (!(t.space() == tsp)) throw SpaceMismatch("point lives outside the conditioning factor");

    CenteredScan scan(basis, t);
    Accepted a = accept_index(mu, basis, scan, k, xi_hat, fuel);
    DiscreteApproximant da = discretize_naturals(a.content, static_cast<long>(k) + 4);
    return {a.content, std::move(da.atoms), a.index, da.slack, xi_hat.verified};
}

Measure tjur_limit(const Measure& mu, const ContinuityBasis& basis, const Point& t,
                   const EcResult& xi_hat, std::size_t fuel_per_level) {
    const Space& sp = mu.space();
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != 2 ||
        sp.factors()[0].kind() != Space::Kind::Naturals)
        throw SpaceMismatch("disintegration limit needs a measure on product(naturals, T)");
    if (!(t.space() == sp.factors()[1]))
        throw SpaceMismatch("point lives outside the conditioning factor");
    return Measure(std::make_shared<TjurLimitImpl>(mu, basis, t, xi_hat, fuel_per_level));
}

TaggedMeasure modulus_disintegrate(const Measure& mu, const ContinuityBasis& basis,
                                   const TjurModulus& mod, const Point& t, std::size_t p,
                                   std::size_t fuel) {
    std::size_t n = mod.locate(t, p + 2);
    if (!ContinuityBasis::is_ball(n))
        throw ContractError("modulus picked an intersection element, need a ball");
    Measure cond = condition_fiber(mu, basis.set(n), fuel);
    return {std::move(cond), Rational::pow2(-static_cast<long>(p))};
}

FnStream fraser_naderi(const Measure& mu, const RegularScheme& scheme, const Point& t,
                       std::size_t fuel) {
    if (scheme.comparability.sign() <= 0)
        throw ContractError("scheme density constant must be positive");
    const Space& tsp = second_factor(mu);
    if (!(t.space() == tsp)) throw SpaceMismatch("point lives outside the conditioning factor");

    struct Memo {
        std::mutex lock;
        std::map<std::size_t, Measure> terms;
    };
    auto memo = std::make_shared<Memo>();
    Measure base = mu;
    RegularScheme sch = scheme;
    Point tt = t;
    return FnStream{[base, sch, tt, fuel, memo](std::size_t n) -> Measure {
        std::scoped_lock lk(memo->lock);
        auto it = memo->terms.find(n);
        if (it != memo->terms.end()) return it->second;
        Measure m = condition_fiber(base, sch.balls(tt, n), fuel);
        memo->terms.emplace(n, m);
        return m;
    }};
}

ContinuitySet word_cset(const Space& cantor_sp, const std::vector<bool>& w) {
    if (cantor_sp.kind() != Space::Kind::Cantor) throw SpaceMismatch("word cell wants Cantor space");
    if (w.empty()) return {OpenSet::whole(cantor_sp), OpenSet::empty(cantor_sp)};
    OpenSet cell = OpenSet::of_balls(
        cantor_sp, {Ball{Space::cantor_tag(w), Rational::pow2(1 - static_cast<long>(w.size()))}});
    std::vector<Ball> flips;
    for (std::size_t i = 0; i < w.size(); ++i) {
        std::vector<bool> f(w.begin(), w.begin() + static_cast<long>(i));
        f.push_back(!w[i]);
        flips.push_back(Ball{Space::cantor_tag(f), Rational::pow2(-static_cast<long>(i))});
    }
    return {cell, OpenSet::of_balls(cantor_sp, std::move(flips))};
}

namespace {

// all boxes [a extends au] x [b extends bv] at one common depth
struct BoxBlock {
    std::vector<bool> au, bv;
    std::size_t depth; // >= max(|au|, |bv|, 1)

    std::size_t count() const {
        return std::size_t{1} << ((depth - au.size()) + (depth - bv.size()));
    }
    Ball ball(const Space& sq, std::size_t j) const {
        std::size_t nu = depth - au.size(), nv = depth - bv.size();
        std::size_t ju = j >> nv, jv = j & ((std::size_t{1} << nv) - 1);
        std::vector<bool> a = au, b = bv;
        for (std::size_t i = 0; i < nu; ++i) a.push_back(((ju >> (nu - 1 - i)) & 1) != 0);
        for (std::size_t i = 0; i < nv; ++i) b.push_back(((jv >> (nv - 1 - i)) & 1) != 0);
        return Ball{sq.pair({Space::cantor_tag(a), Space::cantor_tag(b)}),
                    Rational::pow2(1 - static_cast<long>(depth))};
    }
};

} // namespace

ContinuitySet box_cset(const Space& sq, const std::vector<bool>& wu,
                       const std::vector<bool>& wv) {
    if (sq.kind() != Space::Kind::Product || sq.factors().size() != 2 ||
        sq.factors()[0].kind() != Space::Kind::Cantor ||
        sq.factors()[1].kind() != Space::Kind::Cantor)
        throw SpaceMismatch("box cell wants a product of two Cantor spaces");
    if (wu.empty() && wv.empty()) return {OpenSet::whole(sq), OpenSet::empty(sq)};

    auto cell_block =
        std::make_shared<BoxBlock>(BoxBlock{wu, wv, std::max({wu.size(), wv.size(), std::size_t{1}})});
    OpenSet cell(
        sq,
        [sq, cell_block](std::size_t i) -> std::optional<Ball> {
            if (i >= cell_block->count()) return std::nullopt;
            return cell_block->ball(sq, i);
        },
        cell_block->count());

    // complement: flip a u-prefix (v side free), or keep wu and flip a v-prefix
    auto comp = std::make_shared<std::vector<BoxBlock>>();
    for (std::size_t i = 0; i < wu.size(); ++i) {
        std::vector<bool> f(wu.begin(), wu.begin() + static_cast<long>(i));
        f.push_back(!wu[i]);
        comp->push_back({f, {}, std::max(f.size(), std::size_t{1})});
    }
    for (std::size_t j = 0; j < wv.size(); ++j) {
        std::vector<bool> f(wv.begin(), wv.begin() + static_cast<long>(j));
        f.push_back(!wv[j]);
        comp->push_back({wu, f, std::max({wu.size(), f.size(), std::size_t{1}})});
    }
    std::size_t total = 0;
    for (const BoxBlock& blk : *comp) total += blk.count();
    OpenSet witness(
        sq,
        [sq, comp](std::size_t i) -> std::optional<Ball> {
            for (const BoxBlock& blk : *comp) {
                if (i < blk.count()) return blk.ball(sq, i);
                i -= blk.count();
            }
            return std::nullopt;
        },
        total);
    return {cell, witness};
}

RegularScheme cantor_ball_scheme(const Space& fiber) {
    bool plain = fiber.kind() == Space::Kind::Cantor;
    bool boxed = fiber.kind() == Space::Kind::Product && fiber.factors().size() == 2 &&
                 fiber.factors()[0].kind() == Space::Kind::Cantor &&
                 fiber.factors()[1].kind() == Space::Kind::Cantor;
    if (!plain && !boxed)
        throw SpaceMismatch("cell scheme wants Cantor space or a square of it");

    Space sp = fiber;
    auto balls = [sp, plain](const Point& t, std::size_t n) -> ContinuitySet {
        if (!(t.space() == sp)) throw SpaceMismatch("scheme point lives elsewhere");
        Tag tag = t.at(static_cast<long>(n) + 2);
        if (plain) {
            std::vector<bool> w = sp.cantor_word(tag);
            w.resize(n, false);
            return word_cset(sp, w);
        }
        std::vector<Tag> parts = sp.unpair(tag);
        std::vector<bool> a = sp.factors()[0].cantor_word(parts[0]);
        std::vector<bool> b = sp.factors()[1].cantor_word(parts[1]);
        a.resize(n, false);
        b.resize(n, false);
        return box_cset(sp, a, b);
    };
    return {balls, Rational(1)};
}

} // namespace disint
