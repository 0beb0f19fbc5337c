#pragma once

#include <string>

#include "disint/rational.hpp"

namespace disint {

// Closed rational interval [lo, hi], lo <= hi.  The workhorse enclosure type:
// every numeric answer in this library is "the true value lies in here".
struct Interval {
    Rational lo, hi;

    Interval() : lo(0), hi(0) {}
    Interval(Rational v) : lo(v), hi(v) {}
    Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw ContractError("interval with lo > hi");
    }

    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / 2; }
    bool is_point() const { return lo == hi; }
    bool contains(const Rational& q) const { return lo <= q && q <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    bool disjoint_from(const Interval& o) const { return hi < o.lo || o.hi < lo; }

    // Magnitude bound |x| <= mag() for all x in the interval.
    Rational mag() const { return max(lo.abs(), hi.abs()); }

    friend Interval operator-(const Interval& a) { return {-a.hi, -a.lo}; }
    friend Interval operator+(const Interval& a, const Interval& b) {
        return {a.lo + b.lo, a.hi + b.hi};
    }
    friend Interval operator-(const Interval& a, const Interval& b) {
        return {a.lo - b.hi, a.hi - b.lo};
    }
    friend Interval operator*(const Interval& a, const Interval& b) {
        Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
        Rational lo = c[0], hi = c[0];
        for (int i = 1; i < 4; ++i) { lo = min(lo, c[i]); hi = max(hi, c[i]); }
        return {lo, hi};
    }
    // Pre: b excludes zero.
    friend Interval operator/(const Interval& a, const Interval& b) {
        if (b.contains(Rational(0))) throw ContractError("interval division by enclosure of zero");
        Interval inv(Rational(1) / b.hi, Rational(1) / b.lo);
        return a * inv;
    }

    friend Interval operator*(const Interval& a, const Rational& q) { return a * Interval(q); }
    friend Interval operator+(const Interval& a, const Rational& q) { return a + Interval(q); }
    friend Interval operator-(const Interval& a, const Rational& q) { return a - Interval(q); }

    // Intersection; both must enclose the same true value, so emptiness is a
    // broken-invariant situation the caller turns into an error.
    friend Interval meet(const Interval& a, const Interval& b) {
        Rational l = max(a.lo, b.lo), h = min(a.hi, b.hi);
        if (l > h) throw ContractError("meet of disjoint enclosures (soundness bug upstream)");
        return {l, h};
    }
    friend Interval hull(const Interval& a, const Interval& b) {
        return {min(a.lo, b.lo), max(a.hi, b.hi)};
    }

    Interval abs() const {
        if (lo.sign() >= 0) return *this;
        if (hi.sign() <= 0) return -*this;
        return {Rational(0), mag()};
    }

    std::string str() const { return "[" + lo.str() + ", " + hi.str() + "]"; }
};

} // namespace disint
