#include "disint/space.hpp"

#include <sstream>

#include "disint/errors.hpp"

namespace disint {

namespace {

// Cantor pairing on arbitrary-precision naturals.
BigInt pair2(const BigInt& x, const BigInt& y) {
    BigInt s = x + y;
    return s * (s + 1) / 2 + y;
}

void unpair2(const BigInt& z, BigInt& x, BigInt& y) {
    // w = floor((sqrt(8z+1)-1)/2)
    BigInt t8 = 8 * z + 1;
    BigInt r = sqrt(t8); // floor sqrt
    BigInt w = (r - 1) / 2;
    while (w * (w + 1) / 2 > z) --w;
    while ((w + 1) * (w + 2) / 2 <= z) ++w;
    BigInt tri = w * (w + 1) / 2;
    y = z - tri;
    x = w - y;
}

std::size_t bit_length(const BigInt& n) {
    if (n == 0) return 0;
    return mpz_sizeinbase(n.get_mpz_t(), 2);
}

} // namespace

Space Space::unit_interval() {
    static auto n = std::make_shared<const Node>(Node{Kind::UnitInterval, {}});
    return Space(n);
}
Space Space::naturals() {
    static auto n = std::make_shared<const Node>(Node{Kind::Naturals, {}});
    return Space(n);
}
Space Space::cantor() {
    static auto n = std::make_shared<const Node>(Node{Kind::Cantor, {}});
    return Space(n);
}
Space Space::product(std::vector<Space> factors) {
    if (factors.size() < 2) throw ContractError("product space needs at least two factors");
    return Space(std::make_shared<const Node>(Node{Kind::Product, std::move(factors)}));
}

bool operator==(const Space& a, const Space& b) {
    if (a.kind() != b.kind()) return false;
    if (a.kind() != Space::Kind::Product) return true;
    const auto& fa = a.factors();
    const auto& fb = b.factors();
    if (fa.size() != fb.size()) return false;
    for (std::size_t i = 0; i < fa.size(); ++i)
        if (!(fa[i] == fb[i])) return false;
    return true;
}

bool Space::is_ultrametric() const {
    switch (kind()) {
        case Kind::UnitInterval: return false;
        case Kind::Naturals:
        case Kind::Cantor: return true;
        case Kind::Product:
            for (const auto& f : factors())
                if (!f.is_ultrametric()) return false;
            return true;
    }
    throw UnknownKind("space kind");
}

// Dense sequence of [0,1]: 0, 1, 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, ...
Rational Space::unit_value(const Tag& i) const {
    if (kind() != Kind::UnitInterval) throw SpaceMismatch("unit_value on non-interval space");
    if (i < 0) throw ContractError("negative dense index");
    if (i == 0) return Rational(0);
    if (i == 1) return Rational(1);
    BigInt off = i - 2; // offset into levels b = 1, 2, ...: level b holds 2^(b-1) entries
    std::size_t b = bit_length(off + 1); // since cumulative before level b is 2^(b-1)-1
    BigInt before = (BigInt(1) << (b - 1)) - 1;
    BigInt pos = off - before;
    BigInt num = 2 * pos + 1;
    BigInt den = BigInt(1) << b;
    return Rational(num, den);
}

Tag Space::unit_tag(const Rational& q) {
    if (q < Rational(0) || q > Rational(1) || !q.is_dyadic())
        throw ContractError("unit_tag wants a dyadic in [0,1], got " + q.str());
    if (q == Rational(0)) return Tag(0);
    if (q == Rational(1)) return Tag(1);
    // q = num/2^b with num odd
    BigInt den = q.den();
    std::size_t b = bit_length(den) - 1;
    BigInt pos = (q.num() - 1) / 2;
    return (BigInt(1) << (b - 1)) - 1 + pos + 2;
}

// Dense sequence of 2^w: eventually-zero words ordered by (length, bits).
// Index 0 = all-zero word; otherwise bit-length of the index determines the
// word length (which ends in its last 1).
std::vector<bool> Space::cantor_word(const Tag& i) const {
    if (kind() != Kind::Cantor) throw SpaceMismatch("cantor_word on non-cantor space");
    if (i < 0) throw ContractError("negative dense index");
    if (i == 0) return {};
    std::size_t l = bit_length(i);
    BigInt prefix = i - (BigInt(1) << (l - 1));
    std::vector<bool> w(l);
    for (std::size_t k = 0; k + 1 < l; ++k)
        w[k] = mpz_tstbit(prefix.get_mpz_t(), static_cast<mp_bitcnt_t>(l - 2 - k)) != 0;
    w[l - 1] = true;
    return w;
}

Tag Space::cantor_tag(const std::vector<bool>& word) {
    std::size_t l = word.size();
    while (l > 0 && !word[l - 1]) --l; // strip trailing zeros
    if (l == 0) return Tag(0);
    BigInt prefix = 0;
    for (std::size_t k = 0; k + 1 < l; ++k) {
        prefix <<= 1;
        if (word[k]) prefix += 1;
    }
    return (BigInt(1) << (l - 1)) + prefix;
}

std::vector<Tag> Space::unpair(const Tag& i) const {
    if (kind() != Kind::Product) throw SpaceMismatch("unpair on non-product space");
    std::size_t n = factors().size();
    std::vector<Tag> parts(n);
    Tag rest = i;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        BigInt x, y;
        unpair2(rest, x, y);
        parts[k] = x;
        rest = y;
    }
    parts[n - 1] = rest;
    return parts;
}

Tag Space::pair(const std::vector<Tag>& parts) const {
    if (kind() != Kind::Product) throw SpaceMismatch("pair on non-product space");
    if (parts.size() != factors().size()) throw ContractError("pair arity mismatch");
    Tag acc = parts.back();
    for (std::size_t k = parts.size() - 1; k-- > 0;) acc = pair2(parts[k], acc);
    return acc;
}

Rational Space::dense_metric(const Tag& i, const Tag& j) const {
    switch (kind()) {
        case Kind::UnitInterval: {
            Rational d = unit_value(i) - unit_value(j);
            return d.abs();
        }
        case Kind::Naturals:
            return i == j ? Rational(0) : Rational(1);
        case Kind::Cantor: {
            if (i == j) return Rational(0);
            auto u = cantor_word(i), v = cantor_word(j);
            std::size_t n = std::max(u.size(), v.size());
            for (std::size_t k = 0; k < n; ++k) {
                bool a = k < u.size() && u[k];
                bool b = k < v.size() && v[k];
                if (a != b) return Rational::pow2(-static_cast<long>(k));
            }
            return Rational(0);
        }
        case Kind::Product: {
            auto pi = unpair(i), pj = unpair(j);
            Rational best(0);
            for (std::size_t k = 0; k < factors().size(); ++k)
                best = std::max(best, factors()[k].dense_metric(pi[k], pj[k]));
            return best;
        }
    }
    throw UnknownKind("space kind");
}

std::string Space::dense_str(const Tag& i) const {
    switch (kind()) {
        case Kind::UnitInterval: return unit_value(i).str();
        case Kind::Naturals: return i.get_str();
        case Kind::Cantor: {
            auto w = cantor_word(i);
            std::string s;
            for (bool b : w) s += b ? '1' : '0';
            return s.empty() ? "e" : s; // "e" = empty word (all zeros)
        }
        case Kind::Product: {
            auto parts = unpair(i);
            std::string s = "(";
            for (std::size_t k = 0; k < parts.size(); ++k) {
                if (k) s += ",";
                s += factors()[k].dense_str(parts[k]);
            }
            return s + ")";
        }
    }
    throw UnknownKind("space kind");
}

std::string Space::str() const {
    switch (kind()) {
        case Kind::UnitInterval: return "unit-interval";
        case Kind::Naturals: return "naturals";
        case Kind::Cantor: return "cantor";
        case Kind::Product: {
            std::string s = "product(";
            for (std::size_t k = 0; k < factors().size(); ++k) {
                if (k) s += ",";
                s += factors()[k].str();
            }
            return s + ")";
        }
    }
    throw UnknownKind("space kind");
}

Point Point::unit_rational(const Rational& t) {
    if (t < Rational(0) || t > Rational(1)) throw ContractError("unit point out of range: " + t.str());
    return Point(Space::unit_interval(), [t](long p) {
        // truncate the binary expansion at p+2 bits: distance to t < 2^-(p+2)
        Rational scale = Rational::pow2(p + 2);
        Rational trunc = Rational(BigInt((t * scale).floor()), BigInt(scale.num()));
        return Space::unit_tag(trunc);
    });
}

Point Point::cantor_stream(std::function<bool(std::size_t)> bit) {
    auto fn = std::make_shared<std::function<bool(std::size_t)>>(std::move(bit));
    return Point(Space::cantor(), [fn](long p) {
        std::vector<bool> w(static_cast<std::size_t>(p) + 2);
        for (std::size_t k = 0; k < w.size(); ++k) w[k] = (*fn)(k);
        return Space::cantor_tag(w); // agrees with the target to depth p+2
    });
}

Point Point::tuple(const Space& sp, std::vector<Point> parts) {
    if (sp.kind() != Space::Kind::Product || sp.factors().size() != parts.size())
        throw SpaceMismatch("tuple arity/space mismatch");
    auto ps = std::make_shared<std::vector<Point>>(std::move(parts));
    return Point(sp, [sp, ps](long p) {
        std::vector<Tag> tags;
        tags.reserve(ps->size());
        for (const auto& pt : *ps) tags.push_back(pt.at(p));
        return sp.pair(tags);
    });
}

LocatedReal Point::metric(const Point& other) const {
    if (!(sp_ == other.sp_)) throw SpaceMismatch("metric between different spaces");
    Point a = *this, b = other;
    Space sp = sp_;
    return LocatedReal([a, b, sp](long p) {
        // d(a_s, b_s) is within 2*2^-(s-1) of d(a, b)
        long s = p + 3;
        Rational d = sp.dense_metric(a.at(s), b.at(s));
        Rational err = Rational::pow2(-s + 2);
        Rational lo = std::max(Rational(0), d - err);
        return Interval{lo, d + err};
    });
}

Point limit_fast_cauchy(const Space& sp, std::function<Point(std::size_t)> seq) {
    auto fn = std::make_shared<std::function<Point(std::size_t)>>(std::move(seq));
    return Point(sp, [sp, fn](long p) {
        // x = lim x_n with d(x_n, x_{n+1}) < 2^-n, so d(x_n, x) <= 2^-(n-1).
        // Read x_{p+3} at precision p+3: d(tag, x) <= 2^-(p+2) + 2^-(p+2)
        // = 2^-(p+1), so consecutive outputs move by < 2^-p as required.
        std::size_t n = static_cast<std::size_t>(p) + 3;
        Point xn = (*fn)(n);
        // spot-check the fast-Cauchy promise on the first few steps
        std::size_t checks = std::min<std::size_t>(n, 4);
        for (std::size_t k = 0; k + 1 <= checks; ++k) {
            Point a = (*fn)(k), b = (*fn)(k + 1);
            long s = static_cast<long>(k) + 4;
            Rational d = sp.dense_metric(a.at(s), b.at(s));
            // d(x_k, x_{k+1}) >= d(tags) - 2^-(s-1) - 2^-(s-1); must be < 2^-k
            if (d - Rational::pow2(-s + 2) >= Rational::pow2(-static_cast<long>(k)))
                throw CauchyViolation("limit_fast_cauchy: step " + std::to_string(k) +
                                      " moved by " + d.str());
        }
        return xn.at(p + 3);
    });
}

bool ball_contains(const Space& sp, const Ball& outer, const Ball& inner) {
    return sp.dense_metric(outer.center, inner.center) + inner.radius <= outer.radius;
}

SemiBool member(const Point& x, const OpenSet& u, std::size_t fuel) {
    if (!(x.space() == u.space())) throw SpaceMismatch("member: point/open set space mismatch");
    const Space& sp = x.space();
    for (std::size_t s = 0; s <= fuel; ++s) {
        Tag xs = x.at(static_cast<long>(s));
        Rational err = Rational::pow2(-static_cast<long>(s) + 1); // d(x, x_s) < 2^-(s-1)
        // scan quadratically many stream slots per stage: diagonal-encoded
        // streams (intersections, cylinders) park their balls at large indices
        for (std::size_t i = 0; i <= (s + 1) * (s + 1); ++i) {
            auto b = u.at(i);
            if (!b) continue;
            if (sp.dense_metric(xs, b->center) + err < b->radius)
                return SemiBool::certified(s);
        }
    }
    return SemiBool::unknown(fuel);
}

} // namespace disint
