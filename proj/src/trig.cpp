#include "disint/trig.hpp"

#include <map>
#include <mutex>

namespace disint {

namespace {

// Alternating series sum_{j>=0} (-1)^j / ((2j+1) n^(2j+1)) = arctan(1/n).
// Partial sums bracket the truth, so stop once the next term is small enough
// and return the bracket.
Interval arctan_inv(long n, const Rational& term_eps) {
    Rational npow(1, n);             // n^-(2j+1)
    Rational nsq_inv(1, (long)n * n);
    Rational s(0);
    bool add = true;
    for (long j = 0;; ++j) {
        Rational t = npow / Rational(2 * j + 1);
        if (t <= term_eps) {
            // truth lies between s and s +/- t
            return add ? Interval(s, s + t) : Interval(s - t, s);
        }
        s = add ? s + t : s - t;
        add = !add;
        npow *= nsq_inv;
    }
}

Interval compute_pi(long p) {
    // width(16A - 4B) <= 16 wA + 4 wB; keep each arctan bracket below 2^-(p+6)
    Rational eps = Rational::pow2(-(p + 6));
    Interval a = arctan_inv(5, eps);
    Interval b = arctan_inv(239, eps);
    return a * Rational(16) - b * Rational(4);
}

Interval int_pow(const Interval& x, long e) {
    // x > 0 here, so powers are monotone
    Rational lo(1), hi(1);
    for (long i = 0; i < e; ++i) { lo *= x.lo; hi *= x.hi; }
    return {lo, hi};
}

} // namespace

Interval pi_enclosure(long p) {
    if (p < 0) p = 0;
    static std::mutex mu;
    static std::map<long, Interval> cache;
    std::scoped_lock lk(mu);
    auto it = cache.lower_bound(p);
    if (it != cache.end()) return it->second;  // cached at >= requested precision
    Interval v = compute_pi(p);
    cache[p] = v;
    return v;
}

Interval sin_pi_enclosure(const Rational& q, long p) {
    if (p < 0) p = 0;
    // exact reduction: r = q mod 2 in [0,2), sin(pi q) = sin(pi r)
    Rational r = q - Rational(2) * Rational((q / 2).floor());
    int sign = 1;
    if (r > Rational(1)) { r -= 1; sign = -1; }      // sin(pi(1+t)) = -sin(pi t)
    if (r > Rational(1, 2)) r = Rational(1) - r;     // fold onto [0, 1/2]
    if (r.sign() == 0) return Interval(Rational(0));
    if (r == Rational(1, 2)) return Interval(Rational(sign));

    for (long pp = p + 8;; pp += 16) {
        Interval theta = pi_enclosure(pp) * r;       // in (0, pi/2)
        // sin t = sum (-1)^j t^(2j+1)/(2j+1)!, terms decrease from j=0 on
        // since t^2 < 6; remainder bounded by first omitted term.
        Interval s(Rational(0));
        BigInt fact = 1;
        long j = 0;
        Rational tail_eps = Rational::pow2(-(p + 3));
        for (;; ++j) {
            Interval term = int_pow(theta, 2 * j + 1) * Rational(BigInt(1), fact);
            if (term.hi <= tail_eps) {
                s = s + Interval(-term.hi, term.hi);
                break;
            }
            s = (j % 2 == 0) ? s + term : s - term;
            fact *= BigInt(2 * j + 2) * BigInt(2 * j + 3);
            if (j > 64) throw EnclosureStall("sin series failed to converge (bad reduction?)");
        }
        if (s.width() <= Rational::pow2(-p))
            return sign < 0 ? -s : s;
        // pi enclosure was too loose for this term count; retry tighter
    }
}

Interval cos_pow2_integral(long K, const Rational& a, const Rational& b, long p) {
    if (p < 0) p = 0;
    Rational scale = Rational::pow2(K + 1);
    for (long pp = p + 4;; pp += 8) {
        Interval s = sin_pi_enclosure(scale * b, pp) - sin_pi_enclosure(scale * a, pp);
        if (s.lo.sign() == 0 && s.hi.sign() == 0) return Interval(Rational(0));  // grid-aligned: exact
        Interval denom = pi_enclosure(pp) * scale;
        Interval r = s / denom;
        if (r.width() <= Rational::pow2(-p)) return r;
    }
}

} // namespace disint
