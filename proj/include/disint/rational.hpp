#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "disint/errors.hpp"

namespace disint {

using BigInt = mpz_class;

// Arbitrary-precision rational, always in lowest terms with positive
// denominator.  Thin wrapper over GMP's mpq_class; every constructor
// canonicalizes, every arithmetic result stays canonical.
class Rational {
  public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}
    Rational(const BigInt& n) : v_(n) {}
    Rational(const BigInt& num, const BigInt& den) : v_(num, den) {
        if (den == 0) throw ContractError("rational with zero denominator");
        v_.canonicalize();
    }
    Rational(long num, long den) : Rational(BigInt(num), BigInt(den)) {}

    static Rational pow2(long e) {  // 2^e, e may be negative
        BigInt p = 1;
        p <<= (e < 0 ? -e : e);
        return e < 0 ? Rational(1, p) : Rational(p);
    }

    const BigInt& num() const { return v_.get_num(); }
    const BigInt& den() const { return v_.get_den(); }

    int sign() const { return sgn(v_); }
    Rational abs() const { return sign() < 0 ? -*this : *this; }

    bool is_integer() const { return v_.get_den() == 1; }
    // true iff den is a power of two (every dyadic a/2^b qualifies)
    bool is_dyadic() const {
        const BigInt& d = v_.get_den();
        return mpz_scan1(d.get_mpz_t(), 0) == mpz_sizeinbase(d.get_mpz_t(), 2) - 1;
    }

    BigInt floor() const {
        BigInt q;
        mpz_fdiv_q(q.get_mpz_t(), v_.get_num().get_mpz_t(), v_.get_den().get_mpz_t());
        return q;
    }
    BigInt ceil() const {
        BigInt q;
        mpz_cdiv_q(q.get_mpz_t(), v_.get_num().get_mpz_t(), v_.get_den().get_mpz_t());
        return q;
    }

    Rational operator-() const { Rational r; r.v_ = -v_; return r; }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.v_ == 0) throw ContractError("rational division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    // serialized as "p" or "p/q", bit-exact; parse rejects anything else
    std::string str() const {
        if (is_integer()) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }
    static Rational parse(const std::string& s) {
        if (s.empty()) throw ContractError("empty rational literal");
        mpq_class q;
        if (q.set_str(s, 10) != 0) throw ContractError("bad rational literal: " + s);
        q.canonicalize();
        Rational r;
        r.v_ = q;
        return r;
    }

    double approx() const { return v_.get_d(); }  // display only, never used in logic

  private:
    mpq_class v_;
};

inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

// exact base-2 comparisons used all over: q < 2^-e etc. go through pow2

// smallest k >= 0 with 2^-k < r, for 0 < r; used by Cantor-space balls.
inline std::optional<long> cantor_ball_depth(const Rational& r) {
    if (r.sign() <= 0) return std::nullopt;  // empty ball
    long k = 0;
    while (Rational::pow2(-k) >= r) ++k;     // r > 0 terminates this
    return k;
}

} // namespace disint
