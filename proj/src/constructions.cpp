#include "disint/constructions.hpp"

#include <algorithm>
#include <map>

#include "disint/errors.hpp"
#include "disint/trig.hpp"

namespace disint {

// ---- witness tables ----

bool WitnessTable::y(unsigned long m, std::size_t n) const {
    bool v = st_->fn(m, n);  // outside the lock: fn may take its own locks
    std::scoped_lock lk(st_->mu);
    auto& [last_false, first_true] = st_->seen[m];
    if (v) {
        if (last_false && *last_false >= n)
            throw ContractError("witness table retracted: y(m,n)=1 but a later column was 0");
        if (!first_true || n < *first_true) first_true = n;
    } else {
        if (first_true && *first_true <= n)
            throw ContractError("witness table retracted: y(m,n)=0 after an earlier 1");
        if (!last_false || n > *last_false) last_false = n;
    }
    return v;
}

std::optional<std::size_t> WitnessTable::iota(unsigned long m, std::size_t fuel) const {
    if (!y(m, fuel)) return std::nullopt;  // monotone: nothing at or before fuel... yet
    std::size_t lo = 0, hi = fuel;
    while (lo < hi) {  // binary search for the first 1, sound by monotonicity
        std::size_t mid = lo + (hi - lo) / 2;
        if (y(m, mid)) hi = mid;
        else lo = mid + 1;
    }
    return hi;
}

WitnessTable WitnessTable::from_enumeration(const Enumeration& x) {
    return WitnessTable([x](unsigned long m, std::size_t n) { return x.emit(n).count(m) > 0; });
}

WitnessTable WitnessTable::ground_truth(std::vector<std::pair<unsigned long, std::size_t>> arrivals) {
    auto first = std::make_shared<std::map<unsigned long, std::size_t>>();
    for (auto& [m, at] : arrivals) {
        auto it = first->find(m);
        if (it == first->end() || at < it->second) (*first)[m] = at;
    }
    return WitnessTable([first](unsigned long m, std::size_t n) {
        auto it = first->find(m);
        return it != first->end() && n >= it->second;
    });
}

WitnessTable witness_table(const Enumeration& x) { return WitnessTable::from_enumeration(x); }

// ---- dyadic intervals ----

DyadicInterval::DyadicInterval(unsigned long i_, unsigned long j_, unsigned long m_)
    : i(i_), j(j_), m(m_) {
    if (i >= j || Rational(BigInt(j)) > Rational::pow2((long)m))
        throw ContractError("dyadic interval needs i < j <= 2^m");
}

Rational DyadicInterval::lo() const { return Rational(BigInt(i)) * Rational::pow2(-(long)m); }
Rational DyadicInterval::hi() const { return Rational(BigInt(j)) * Rational::pow2(-(long)m); }

// ---- row/window decomposition shared by the wave measures ----

namespace {

bool pow2_at_most_one(const Rational& eps) {
    return eps.sign() > 0 && eps <= Rational(1) && eps.num() == 1 && eps.is_dyadic();
}

long dyadic_res(const Rational& q) {  // pre: q.is_dyadic()
    return (long)mpz_sizeinbase(q.den().get_mpz_t(), 2) - 1;
}

using Window = std::pair<Rational, Rational>;

std::vector<Window> merge_windows(std::vector<Window> ws) {
    std::sort(ws.begin(), ws.end());
    std::vector<Window> out;
    for (auto& w : ws) {
        if (!out.empty() && w.first <= out.back().second)
            out.back().second = max(out.back().second, w.second);
        else
            out.push_back(w);
    }
    return out;
}

Rational word_value(const std::vector<bool>& w) {
    Rational v(0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i]) v += Rational::pow2(-(long)i - 1);
    return v;
}

struct RowWindows {
    bool whole = false;
    std::map<unsigned long, std::vector<Window>> rows;
};

RowWindows decompose_rows(const Space& sp, const std::vector<Ball>& balls, bool cantor_second) {
    RowWindows out;
    const Space& second = sp.factors()[1];
    for (const Ball& b : balls) {
        if (b.radius > Rational(1)) {
            out.whole = true;
            return out;
        }
        if (b.radius.sign() <= 0) continue;
        auto parts = sp.unpair(b.center);
        if (!parts[0].fits_ulong_p()) throw ContractError("row index beyond machine range");
        unsigned long row = parts[0].get_ui();
        Rational lo, hi;
        if (cantor_second) {
            long d = *cantor_ball_depth(b.radius);
            auto w = second.cantor_word(parts[1]);
            w.resize((std::size_t)d);
            lo = word_value(w);
            hi = lo + Rational::pow2(-d);
        } else {
            Rational c = second.unit_value(parts[1]);
            lo = max(Rational(0), c - b.radius);
            hi = min(Rational(1), c + b.radius);
        }
        if (lo < hi) out.rows[row].push_back({lo, hi});
    }
    return out;
}

struct RowVal {
    Interval enc{Rational(0)};
    bool exact = true;
};

// Mass of row `row` restricted to the merged windows.  Row 2m carries density
// 2^-(m+2) (1 + cos(2^(iota(m)+1) pi z)), row 2m+1 the 1 - cos complement.
// Windows whose endpoints are dyadic coarser than the wave make the cosine
// integrate to exactly zero, which is decidable from a bounded iota probe;
// otherwise we return an enclosure whose quality grows with `stage`.
RowVal row_wave_value(const WitnessTable& y, unsigned long row, const std::vector<Window>& merged,
                      long stage) {
    long m = (long)(row / 2);
    int sign = (row % 2 == 0) ? 1 : -1;
    Rational scale = Rational::pow2(-m - 2);
    Rational len(0);
    bool dyadic = true;
    long rmax = 0;
    for (auto& [a, b] : merged) {
        len += b - a;
        if (a.is_dyadic() && b.is_dyadic())
            rmax = std::max(rmax, std::max(dyadic_res(a), dyadic_res(b)));
        else
            dyadic = false;
    }
    if (len.sign() == 0) return {Interval(Rational(0)), true};
    Rational flat = scale * len;
    // endpoints on the half-integer grid align with every wave scale
    if (dyadic && rmax <= 1) return {Interval(flat), true};

    std::size_t fuel = stage < 0 ? 0 : (std::size_t)stage;
    if (dyadic && (std::size_t)(rmax - 2) > fuel) fuel = (std::size_t)(rmax - 2);
    auto k0 = y.iota((unsigned long)m, fuel);
    if (!k0) {
        // iota(m) > fuel; with dyadic windows of resolution <= fuel + 2 the
        // wave is aligned on every endpoint and the cosine term vanishes
        if (dyadic) return {Interval(flat), true};
        Rational bound(0);
        for (auto& [a, b] : merged) bound += min(b - a, Rational::pow2(-(long)fuel - 2));
        bound = scale * bound;
        Rational lo = flat - bound;
        if (lo.sign() < 0) lo = Rational(0);
        return {Interval(lo, flat + bound), false};
    }
    long prec = (stage < 0 ? 0 : stage) + m + 8;
    Interval csum{Rational(0)};
    bool exact = true;
    for (auto& [a, b] : merged) {
        Interval c = cos_pow2_integral((long)*k0, a, b, prec);
        exact = exact && c.is_point();
        csum = csum + c;
    }
    Interval total = (Interval(len) + csum * Rational(sign)) * scale;
    if (total.lo.sign() < 0) total = Interval(Rational(0), max(Rational(0), total.hi));
    return {total, exact};
}

class RowWaveMeasure final : public MeasureImpl {
  public:
    RowWaveMeasure(WitnessTable y, bool cantor_second)
        : y_(std::move(y)),
          cantor_(cantor_second),
          sp_(Space::product(
              {Space::naturals(), cantor_second ? Space::cantor() : Space::unit_interval()})) {}

    const Space& space() const override { return sp_; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        auto rw = decompose_rows(sp_, balls, cantor_);
        if (rw.whole) return Rational(1);
        Rational acc(0);
        for (auto& [row, ws] : rw.rows) {
            RowVal v = row_wave_value(y_, row, merge_windows(ws), stage);
            if (v.enc.lo.sign() > 0) acc += v.enc.lo;
        }
        return acc;
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        auto rw = decompose_rows(sp_, balls, cantor_);
        if (rw.whole) return Rational(1);
        Rational acc(0);
        for (auto& [row, ws] : rw.rows) {
            RowVal v = row_wave_value(y_, row, merge_windows(ws), 0);
            if (!v.exact) return std::nullopt;
            acc += v.enc.lo;
        }
        return acc;
    }

    bool radius_good(const Rational& eps) const override {
        if (eps.sign() <= 0) return false;
        if (cantor_) return !pow2_at_most_one(eps);
        return eps != Rational(1);
    }

    std::optional<Measure> marginal_second() const override {
        return cantor_ ? Measure::cantor_uniform() : Measure::lebesgue_unit();
    }

  private:
    WitnessTable y_;
    bool cantor_;
    Space sp_;
};

}  // namespace

Measure mu_x(const WitnessTable& y) {
    return Measure(std::make_shared<RowWaveMeasure>(y, false));
}

Measure eta_x(const WitnessTable& y) {
    return Measure(std::make_shared<RowWaveMeasure>(y, true));
}

// ---- embedding of N x [0,1] into the unit square ----

Rational embed_alpha(unsigned long n) { return Rational::pow2(-(long)n - 1); }

Ball embed_phi(unsigned long n) {
    return Ball{Space::unit_tag(embed_alpha(n)), Rational::pow2(-(long)n - 3)};
}

namespace {

class EmbedSquareMeasure final : public MeasureImpl {
  public:
    explicit EmbedSquareMeasure(Measure base)
        : base_(std::move(base)),
          sp_(Space::product({Space::unit_interval(), Space::unit_interval()})) {
        const Space& bsp = base_.space();
        if (bsp.kind() != Space::Kind::Product || bsp.factors().size() != 2 ||
            bsp.factors()[0].kind() != Space::Kind::Naturals ||
            bsp.factors()[1].kind() != Space::Kind::UnitInterval)
            throw SpaceMismatch("embedding expects a measure on N x [0,1]");
    }

    const Space& space() const override { return sp_; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        std::vector<Ball> mapped;
        if (translate(balls, stage < 0 ? 0 : (std::size_t)stage + 2, mapped)) return Rational(1);
        return base_.mass_lower(mapped, stage);
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        for (const Ball& b : balls)
            if (b.radius <= Rational(1) && b.radius.sign() > 0) {
                Rational c1 = sp_.factors()[0].unit_value(sp_.unpair(b.center)[0]);
                if (c1 <= b.radius) return std::nullopt;  // infinitely many rows qualify
            }
        std::vector<Ball> mapped;
        if (translate(balls, 0, mapped)) return Rational(1);
        return base_.mass_exact(mapped);
    }

    bool radius_good(const Rational& eps) const override {
        // rows sit at dyadic heights and dense centers are dyadic, so any
        // non-dyadic radius keeps every sphere off the mass-carrying lines
        return eps > Rational(1) || (eps.sign() > 0 && !eps.is_dyadic());
    }

    std::optional<Measure> marginal_second() const override { return base_.marginal_second(); }

  private:
    // true = some ball covers the whole square; otherwise appends, per input
    // ball, one base ball {n} x (c2 - r, c2 + r) for each row height with
    // |alpha(n) - c1| < r.  When c1 <= r the qualifying rows are an infinite
    // tail; only the first `extra` + 1 of those are kept (sound from below).
    bool translate(const std::vector<Ball>& balls, std::size_t extra,
                   std::vector<Ball>& mapped) const {
        const Space& bsp = base_.space();
        for (const Ball& b : balls) {
            if (b.radius > Rational(1)) return true;
            if (b.radius.sign() <= 0) continue;
            auto parts = sp_.unpair(b.center);
            Rational c1 = sp_.factors()[0].unit_value(parts[0]);
            bool infinite = c1 <= b.radius;
            std::size_t taken_tail = 0;
            for (unsigned long n = 0;; ++n) {
                Rational a = embed_alpha(n);
                if ((a - c1).abs() < b.radius) {
                    mapped.push_back(Ball{bsp.pair({Tag(n), parts[1]}), b.radius});
                    if (infinite && ++taken_tail > extra) break;
                } else if (a + b.radius <= c1) {
                    break;  // heights only sink; no later row can qualify
                }
            }
        }
        return false;
    }

    Measure base_;
    Space sp_;
};

}  // namespace

Measure embed_discrete(const Measure& mu) {
    return Measure(std::make_shared<EmbedSquareMeasure>(mu));
}

// ---- marker decoding ----

std::optional<std::size_t> marker_scan(const std::vector<bool>& bits, unsigned long k) {
    for (std::size_t q = 1;; ++q) {
        std::size_t end = q + 1 + q * ((std::size_t)k + 1);
        if (end > bits.size()) return std::nullopt;
        bool ok = !bits[q];
        for (std::size_t r = 0; ok && r < q; ++r) {
            std::size_t base = q + 1 + r * ((std::size_t)k + 1);
            for (unsigned long t = 0; ok && t < k; ++t) ok = bits[base + t];
            ok = ok && !bits[base + k];
        }
        if (ok) return end;
    }
}

Enumeration rho(const Point& s) {
    if (s.space().kind() != Space::Kind::Cantor)
        throw SpaceMismatch("marker decoding expects a point of 2^w");
    struct RhoState {
        std::mutex mu;
        std::vector<bool> bits;
        std::set<unsigned long> found;
        std::size_t done = 0;  // stages processed so far
    };
    auto st = std::make_shared<RhoState>();
    // incremental: a marker ending exactly at stage e has e = q(k+2) + 1,
    // so each new stage only inspects the divisors of e - 1
    return Enumeration([s, st](std::size_t stage) {
        std::scoped_lock lk(st->mu);
        while (st->done < stage) {
            std::size_t e = ++st->done;
            while (st->bits.size() < e) {
                std::size_t i = st->bits.size();
                auto w = s.space().cantor_word(s.at((long)i + 2));
                st->bits.push_back(i < w.size() && w[i]);
            }
            if (e < 3) continue;
            std::size_t prod = e - 1;
            auto try_marker = [&](std::size_t q) {
                unsigned long k = (unsigned long)(prod / q - 2);
                if (st->found.count(k)) return;
                bool ok = !st->bits[q];
                for (std::size_t r = 0; ok && r < q; ++r) {
                    std::size_t base = q + 1 + r * ((std::size_t)k + 1);
                    for (unsigned long t = 0; ok && t < k; ++t) ok = st->bits[base + t];
                    ok = ok && !st->bits[base + k];
                }
                if (ok) st->found.insert(k);
            };
            for (std::size_t d = 1; d * d <= prod; ++d) {
                if (prod % d != 0) continue;
                if (prod / d >= 2) try_marker(d);                   // q = d
                if (d >= 2 && d != prod / d) try_marker(prod / d);  // q = prod/d
            }
        }
        return st->found;
    });
}

namespace {

struct InverseState {
    std::mutex mu;
    std::vector<bool> bits;  // committed prefix; ends with 0 once nonempty
    std::set<unsigned long> placed;
    std::size_t consumed = 0;  // enumeration stages folded in so far
    std::size_t handed = 0;    // indices below this were already returned

    // padding after the committed prefix: 1^a 0 cycling on the smallest
    // positive placed k (all ones before the first block, all zeros if only
    // k = 0 was placed -- each keeps every 1-run length inside the set)
    bool provisional(std::size_t i) const {
        if (placed.empty()) return true;
        unsigned long a = 0;
        for (unsigned long k : placed)
            if (k > 0) {
                a = k;
                break;
            }
        if (a == 0) return false;
        std::size_t z = bits.size() - 1;
        return (i - z - 1) % ((std::size_t)a + 1) < (std::size_t)a;
    }

    void place(unsigned long k) {
        std::size_t n;
        if (bits.empty()) {
            n = std::max<std::size_t>(1, handed);
            bits.assign(n, true);
            bits.push_back(false);
        } else {
            // put the marker's leading zero on the padding's zero grid, far
            // enough out that no previously returned bit changes value
            std::size_t z = bits.size() - 1;
            unsigned long a = 0;
            for (unsigned long kk : placed)
                if (kk > 0) {
                    a = kk;
                    break;
                }
            std::size_t c = (std::size_t)a + 1;
            std::size_t lo = std::max(z, handed > 0 ? handed - 1 : 0);
            n = z + ((lo - z + c - 1) / c) * c;
            // same values provisional() was handing out, with the phase pinned
            // to the pre-extension z
            for (std::size_t i = z + 1; i <= n; ++i)
                bits.push_back((i - z - 1) % c < (std::size_t)a);
        }
        for (std::size_t rep = 0; rep < n; ++rep) {
            for (unsigned long t = 0; t < k; ++t) bits.push_back(true);
            bits.push_back(false);
        }
        placed.insert(k);
    }
};

}  // namespace

Point rho_inverse(const Enumeration& x) {
    auto st = std::make_shared<InverseState>();
    Enumeration xe = x;
    return Point::cantor_stream([st, xe](std::size_t i) {
        std::scoped_lock lk(st->mu);
        while (st->consumed <= i) {
            for (unsigned long k : xe.emit(st->consumed))
                if (!st->placed.count(k)) st->place(k);
            ++st->consumed;
        }
        bool v = i < st->bits.size() ? st->bits[i] : st->provisional(i);
        if (i + 1 > st->handed) st->handed = i + 1;
        return v;
    });
}

Interval marker_completion_mass(const std::vector<bool>& prefix, unsigned long k,
                                std::size_t horizon) {
    std::size_t L = prefix.size();
    if (horizon < L) horizon = L;
    if (horizon - L > 26) throw ContractError("marker mass horizon too deep to enumerate");

    // exact part: extensions of the prefix to `horizon` bits that complete
    unsigned long long branches = 1ull << (horizon - L);
    unsigned long long found = 0;
    std::vector<bool> bits = prefix;
    bits.resize(horizon);
    for (unsigned long long mask = 0; mask < branches; ++mask) {
        for (std::size_t i = 0; i < horizon - L; ++i) bits[L + i] = ((mask >> i) & 1) != 0;
        if (marker_scan(bits, k)) ++found;
    }
    Rational lo = Rational(BigInt((unsigned long)found)) * Rational::pow2(-(long)horizon);

    // union-bound tail over markers ending past the horizon: a marker at
    // position q constrains e(q) - max(q, L) bits beyond the prefix
    std::size_t step = (std::size_t)k + 2;  // e(q) = q*step + 1
    std::size_t qmin = horizon == 0 ? 1 : (horizon - 1) / step + 1;  // least q, e(q) > horizon
    Rational tail(0);
    std::size_t q = qmin;
    for (; q < std::max(L, qmin); ++q) tail += Rational::pow2(-(long)(q * step + 1 - L));
    // q >= L: terms 2^-(q(k+1)+1), exact geometric sum
    long e0 = (long)(q * ((std::size_t)k + 1) + 1);
    tail += Rational::pow2(-e0) / (Rational(1) - Rational::pow2(-(long)k - 1));
    Rational hi = min(Rational::pow2(-(long)L), lo + Rational::pow2(-(long)L) * tail);
    return Interval(lo, hi);
}

// ---- the mixture over decoded parameters ----

namespace {

struct BoxQ {
    std::vector<bool> wu, wv;  // cylinder words: second factor x decoder factor
};

bool is_prefix(const std::vector<bool>& p, const std::vector<bool>& w) {
    if (p.size() > w.size()) return false;
    return std::equal(p.begin(), p.end(), w.begin());
}

struct MixRowVal {
    Interval enc{Rational(0)};
    bool exact = true;
};

// Mass, within row `row`, of a union of boxes [wu] x [wv]: the u-coordinate
// feeds the wave measure's second factor, the v-coordinate feeds the decoder.
// Over any v-branch long enough to cover both words, the decoder's witness
// column is either settled inside the branch or provably beyond the wave
// resolution, so each branch contributes a closed form.
MixRowVal mix_row_value(unsigned long row, std::vector<BoxQ> boxes, long prec,
                        std::size_t branch_budget) {
    long m = (long)(row / 2);
    int sign = (row % 2 == 0) ? 1 : -1;
    Rational scale = Rational::pow2(-m - 2);

    // drop boxes contained in another (sort so containers come first)
    std::sort(boxes.begin(), boxes.end(), [](const BoxQ& a, const BoxQ& b) {
        return a.wu.size() + a.wv.size() < b.wu.size() + b.wv.size();
    });
    std::vector<BoxQ> kept;
    for (auto& b : boxes) {
        bool covered = false;
        for (auto& kp : kept)
            if (is_prefix(kp.wu, b.wu) && is_prefix(kp.wv, b.wv)) {
                covered = true;
                break;
            }
        if (!covered) kept.push_back(std::move(b));
    }

    // partition the decoder coordinate into cells on which the active set of
    // u-words is constant
    std::vector<std::vector<bool>> cells;
    std::function<void(std::vector<bool>&)> split = [&](std::vector<bool>& c) {
        bool needs = false;
        for (auto& b : kept)
            if (b.wv.size() > c.size() && is_prefix(c, b.wv)) {
                needs = true;
                break;
            }
        if (!needs) {
            cells.push_back(c);
            return;
        }
        for (bool bit : {false, true}) {
            c.push_back(bit);
            split(c);
            c.pop_back();
        }
    };
    std::vector<bool> root;
    split(root);

    MixRowVal out;
    for (auto& c : cells) {
        // u-words active over this cell, reduced to a disjoint antichain
        std::vector<std::vector<bool>> us;
        for (auto& b : kept)
            if (is_prefix(b.wv, c)) us.push_back(b.wu);
        std::sort(us.begin(), us.end(),
                  [](const auto& a, const auto& b) { return a.size() < b.size(); });
        std::vector<std::vector<bool>> anti;
        for (auto& u : us) {
            bool covered = false;
            for (auto& a : anti)
                if (is_prefix(a, u)) {
                    covered = true;
                    break;
                }
            if (!covered) anti.push_back(u);
        }
        for (auto& a : anti) {
            Rational alo = word_value(a);
            Rational ahi = alo + Rational::pow2(-(long)a.size());
            Rational flat = Rational::pow2(-(long)c.size()) * (ahi - alo);
            std::size_t h = std::max(c.size(), a.empty() ? 0 : a.size() - 1);
            if (h - c.size() >= 8 * sizeof(std::size_t) ||
                ((std::size_t)1 << (h - c.size())) > branch_budget) {
                // too many branches: bound the wave term by the window length
                Rational b = flat;
                out.enc = out.enc + Interval(Rational(0), b + b) * scale;
                out.exact = false;
                continue;
            }
            std::vector<bool> t = c;
            t.resize(h);
            Interval csum{Rational(0)};
            bool ex = true;
            std::size_t free = h - c.size();
            std::size_t nb = (std::size_t)1 << free;
            for (std::size_t mask = 0; mask < nb; ++mask) {
                for (std::size_t i = 0; i < free; ++i) t[c.size() + i] = ((mask >> i) & 1) != 0;
                auto it = marker_scan(t, (unsigned long)m);
                // no completion inside the branch: the witness column exceeds
                // h >= |a| - 1, so the wave is aligned on [a] and drops out
                if (!it) continue;
                Interval cint = cos_pow2_integral((long)*it, alo, ahi, prec + (long)h);
                ex = ex && cint.is_point();
                csum = csum + cint;
            }
            Interval branch =
                (Interval(flat) + csum * (Rational(sign) * Rational::pow2(-(long)h))) * scale;
            out.enc = out.enc + branch;
            out.exact = out.exact && ex;
        }
    }
    if (out.enc.lo.sign() < 0) out.enc = Interval(Rational(0), max(Rational(0), out.enc.hi));
    return out;
}

class MixtureMeasure final : public MeasureImpl {
  public:
    MixtureMeasure()
        : sp_(Space::product({Space::naturals(),
                              Space::product({Space::cantor(), Space::cantor()})})) {}

    const Space& space() const override { return sp_; }

    Rational mass_lower(const std::vector<Ball>& balls, long stage) const override {
        if (stage < 0) stage = 0;
        std::map<unsigned long, std::vector<BoxQ>> rows;
        if (decompose(balls, rows)) return Rational(1);
        Rational acc(0);
        for (auto& [row, boxes] : rows) {
            MixRowVal v = mix_row_value(row, boxes, stage + 6,
                                        (std::size_t)1 << std::min<long>(stage + 10, 22));
            if (v.enc.lo.sign() > 0) acc += v.enc.lo;
        }
        return acc;
    }

    std::optional<Rational> mass_exact(const std::vector<Ball>& balls) const override {
        std::map<unsigned long, std::vector<BoxQ>> rows;
        if (decompose(balls, rows)) return Rational(1);
        Rational acc(0);
        for (auto& [row, boxes] : rows) {
            MixRowVal v = mix_row_value(row, boxes, 8, (std::size_t)1 << 20);
            if (!v.exact) return std::nullopt;
            acc += v.enc.lo;
        }
        return acc;
    }

    bool radius_good(const Rational& eps) const override {
        return eps.sign() > 0 && !pow2_at_most_one(eps);
    }

    std::optional<Measure> marginal_second() const override {
        return Measure::product(Measure::cantor_uniform(), Measure::cantor_uniform());
    }

  private:
    bool decompose(const std::vector<Ball>& balls,
                   std::map<unsigned long, std::vector<BoxQ>>& rows) const {
        const Space& inner = sp_.factors()[1];
        for (const Ball& b : balls) {
            if (b.radius > Rational(1)) return true;
            if (b.radius.sign() <= 0) continue;
            auto parts = sp_.unpair(b.center);
            if (!parts[0].fits_ulong_p()) throw ContractError("row index beyond machine range");
            auto inner_parts = inner.unpair(parts[1]);
            long d = *cantor_ball_depth(b.radius);
            BoxQ q;
            q.wu = inner.factors()[0].cantor_word(inner_parts[0]);
            q.wv = inner.factors()[1].cantor_word(inner_parts[1]);
            q.wu.resize((std::size_t)d);
            q.wv.resize((std::size_t)d);
            rows[parts[0].get_ui()].push_back(std::move(q));
        }
        return false;
    }

    Space sp_;
};

}  // namespace

Measure mixture() { return Measure(std::make_shared<MixtureMeasure>()); }

// ---- reading parameter bits off a conditional on N ----

bool recover_bit(const Measure& nu, unsigned long k) {
    if (nu.space().kind() != Space::Kind::Naturals)
        throw SpaceMismatch("bit recovery expects a measure on N");
    Rational midpoint = Rational(3) * Rational::pow2(-(long)k - 3);
    OpenSet atom = OpenSet::of_balls(nu.space(), {Ball{Tag(2 * k), Rational(1, 2)}});
    LowerReal from_below = nu.eval(atom);
    for (std::size_t s = (std::size_t)k + 4; s <= (std::size_t)k + 40; ++s) {
        Rational lo = from_below.bound_or(s, Rational(0));
        if (lo > midpoint) return true;
        std::vector<Ball> rest;
        for (unsigned long j = 0; j <= 2 * k + 2 + 2 * (unsigned long)s; ++j)
            if (j != 2 * k) rest.push_back(Ball{Tag(j), Rational(1, 2)});
        Rational hi =
            Rational(1) - nu.eval(OpenSet::of_balls(nu.space(), rest)).bound_or(s, Rational(0));
        if (hi < midpoint) return false;
    }
    throw AmbiguousAtom("atom mass stayed too close to the decision midpoint");
}

std::function<bool(unsigned long)> recover_x(const Measure& nu) {
    return [nu](unsigned long k) { return recover_bit(nu, k); };
}

// ---- finite covers of single rows ----

OpenSet row_cylinder(const Space& sp, unsigned long n) {
    if (sp.kind() != Space::Kind::Product || sp.factors().empty() ||
        sp.factors()[0].kind() != Space::Kind::Naturals)
        throw SpaceMismatch("row cylinder expects a product over N");
    std::function<std::vector<Tag>(const Space&)> covers = [&](const Space& t) {
        switch (t.kind()) {
            case Space::Kind::UnitInterval:
                return std::vector<Tag>{Space::unit_tag(Rational(1, 2))};
            case Space::Kind::Cantor:
                return std::vector<Tag>{Space::cantor_tag({false}), Space::cantor_tag({true})};
            case Space::Kind::Product: {
                std::vector<Tag> acc;
                std::vector<std::vector<Tag>> per;
                for (auto& f : t.factors()) per.push_back(covers(f));
                std::vector<std::vector<Tag>> combos{{}};
                for (auto& opts : per) {
                    std::vector<std::vector<Tag>> next;
                    for (auto& c : combos)
                        for (auto& o : opts) {
                            auto cc = c;
                            cc.push_back(o);
                            next.push_back(std::move(cc));
                        }
                    combos = std::move(next);
                }
                for (auto& c : combos) acc.push_back(t.pair(c));
                return acc;
            }
            default:
                throw SpaceMismatch("row cylinder cannot cover this factor with unit balls");
        }
    };
    std::vector<Ball> balls;
    for (auto& t2 : covers(sp.factors()[1]))
        balls.push_back(Ball{sp.pair({Tag(n), t2}), Rational(1)});
    return OpenSet::of_balls(sp, balls);
}

}  // namespace disint
