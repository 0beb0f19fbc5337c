#pragma once

#include "disint/interval.hpp"

namespace disint {

// Enclosure of pi with width <= 2^-p.  Machin's formula with alternating
// arctan tails; fully rational, memoized.
Interval pi_enclosure(long p);

// Enclosure of sin(pi * q) with width <= 2^-p.  Exact range reduction mod 2,
// then an alternating Taylor series on [0, pi/2] whose remainder is bounded
// by the first omitted term.  Integer and half-integer q come back exact
// (width zero) — several downstream identities rely on that.
Interval sin_pi_enclosure(const Rational& q, long p);

// Enclosure of the definite integral  int_a^b cos(2^(K+1) pi z) dz
// = [sin(2^(K+1) pi b) - sin(2^(K+1) pi a)] / (2^(K+1) pi),  width <= 2^-p.
// Exact zero when both endpoints land on the wave's period grid.
Interval cos_pow2_integral(long K, const Rational& a, const Rational& b, long p);

} // namespace disint
