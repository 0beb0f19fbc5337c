#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disint/located.hpp"
#include "disint/rational.hpp"

namespace disint {

// Index into a space's canonical dense sequence.  Arbitrary precision:
// product indices are Cantor-paired and outgrow 64 bits fast.
using Tag = BigInt;

// Cantor pairing on stream indices; the workhorse for diagonal interleaving.
std::size_t diag_pair(std::size_t a, std::size_t b);
void diag_unpair(std::size_t n, std::size_t& a, std::size_t& b);

// A computable metric space descriptor: one of the concrete spaces this
// library knows how to enumerate densely and measure exactly.
//   unit-interval  [0,1], dense = dyadics a/2^b
//   naturals       discrete metric, dense = everything
//   cantor         2^w with d = 2^-(first disagreement), dense = eventually-zero
//   product        finitely many factors, max metric
// Every space here has diameter <= 1, so radius > 1 means "everything".
class Space {
  public:
    enum class Kind { UnitInterval, Naturals, Cantor, Product };

    static Space unit_interval();
    static Space naturals();
    static Space cantor();
    static Space product(std::vector<Space> factors);

    Kind kind() const { return node_->kind; }
    const std::vector<Space>& factors() const { return node_->factors; }
    bool is_ultrametric() const;  // naturals and cantor are; products of such too

    // exact distance between dense points
    Rational dense_metric(const Tag& i, const Tag& j) const;

    // decode helpers (what does this tag denote?)
    Rational unit_value(const Tag& i) const;                  // kind == UnitInterval
    std::vector<bool> cantor_word(const Tag& i) const;        // kind == Cantor
    std::vector<Tag> unpair(const Tag& i) const;              // kind == Product
    Tag pair(const std::vector<Tag>& parts) const;            // kind == Product

    // encode helpers
    static Tag unit_tag(const Rational& dyadic);              // pre: dyadic in [0,1]
    static Tag cantor_tag(const std::vector<bool>& word);     // trailing zeros ok

    std::string dense_str(const Tag& i) const;  // human-readable tag
    std::string str() const;

    friend bool operator==(const Space& a, const Space& b);

  private:
    struct Node {
        Kind kind;
        std::vector<Space> factors;
    };
    explicit Space(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

// A point name: fast-Cauchy stream of dense indices,
// d(at(p), at(p+1)) < 2^-p, hence d(at(p), x) < 2^-(p-1).
class Point {
  public:
    using Gen = std::function<Tag(long)>;

    Point(Space sp, Gen gen) : sp_(std::move(sp)), st_(std::make_shared<State>(std::move(gen))) {}

    const Space& space() const { return sp_; }
    Tag at(long p) const {
        if (p < 0) p = 0;
        std::scoped_lock lk(st_->mu);
        auto it = st_->memo.find(p);
        if (it != st_->memo.end()) return it->second;
        Tag t = st_->gen(p);
        st_->memo.emplace(p, t);
        return t;
    }

    static Point at_dense(const Space& sp, const Tag& tag) {
        return Point(sp, [tag](long) { return tag; });
    }
    // point of [0,1] from an arbitrary rational (binary-expansion truncations)
    static Point unit_rational(const Rational& t);
    // point of 2^w from a total bit stream
    static Point cantor_stream(std::function<bool(std::size_t)> bit);
    // product point from component points
    static Point tuple(const Space& sp, std::vector<Point> parts);

    // exact distance enclosure between two point names
    LocatedReal metric(const Point& other) const;

  private:
    struct State {
        explicit State(Gen g) : gen(std::move(g)) {}
        Gen gen;
        std::mutex mu;
        std::map<long, Tag> memo;
    };
    Space sp_;
    std::shared_ptr<State> st_;
};

// Limit of a fast-Cauchy sequence of point names (d(x_n, x_{n+1}) < 2^-n).
// Prefix spot-checks throw CauchyViolation on detectable cheating.
Point limit_fast_cauchy(const Space& sp, std::function<Point(std::size_t)> seq);

// basic open: metric ball around a dense point
struct Ball {
    Tag center;
    Rational radius;  // > 0; > 1 covers the whole space (diameters are <= 1)
};

// An open set name: countable stream of balls with a padding sentinel, the
// set being the union.  Immutable, memoized, concurrency-safe.
class OpenSet {
  public:
    using Gen = std::function<std::optional<Ball>(std::size_t)>;

    // fin: slots at or beyond this index are all padding (when known).
    // Exact evaluation shortcuts key off this hint.
    OpenSet(Space sp, Gen gen, std::optional<std::size_t> fin = std::nullopt)
        : sp_(std::move(sp)), fin_(fin), st_(std::make_shared<State>(std::move(gen))) {}

    const Space& space() const { return sp_; }
    std::optional<std::size_t> finite_bound() const { return fin_; }
    std::optional<Ball> at(std::size_t i) const {
        std::scoped_lock lk(st_->mu);
        while (st_->memo.size() <= i) st_->memo.push_back(st_->gen(st_->memo.size()));
        return st_->memo[i];
    }
    // first `n` stream slots with padding dropped
    std::vector<Ball> prefix(std::size_t n) const {
        std::vector<Ball> out;
        for (std::size_t i = 0; i < n; ++i)
            if (auto b = at(i)) out.push_back(*b);
        return out;
    }

    static OpenSet empty(const Space& sp) {
        return OpenSet(
            sp, [](std::size_t) { return std::nullopt; }, 0);
    }
    static OpenSet whole(const Space& sp) {
        return OpenSet(
            sp,
            [](std::size_t i) -> std::optional<Ball> {
                if (i > 0) return std::nullopt;
                return Ball{Tag(0), Rational(2)};
            },
            1);
    }
    static OpenSet of_balls(const Space& sp, std::vector<Ball> bs) {
        auto v = std::make_shared<std::vector<Ball>>(std::move(bs));
        std::size_t n = v->size();
        return OpenSet(
            sp,
            [v](std::size_t i) -> std::optional<Ball> {
                if (i < v->size()) return (*v)[i];
                return std::nullopt;
            },
            n);
    }

  private:
    struct State {
        explicit State(Gen g) : gen(std::move(g)) {}
        Gen gen;
        std::mutex mu;
        std::vector<std::optional<Ball>> memo;
    };
    Space sp_;
    std::optional<std::size_t> fin_;
    std::shared_ptr<State> st_;
};

// ---- open-set algebra (opens.cpp) ----

// union via even/odd interleaving
OpenSet unite(const OpenSet& a, const OpenSet& b);
// countable union via diagonal interleaving
OpenSet unite_all(const Space& sp, std::function<OpenSet(std::size_t)> parts);
// intersection; exact single balls where the geometry allows, dyadic
// exhaustion streams otherwise
OpenSet intersect(const OpenSet& a, const OpenSet& b);
// intersection of two single balls (same machinery as intersect, no
// enumeration layer on top)
OpenSet meet_balls(const Space& sp, const Ball& b1, const Ball& b2);
// all radii grown by eps (used for Prokhorov-style fattening)
OpenSet fatten(const OpenSet& a, const Rational& eps);
// S x U for U open in T, as an open set of product(S, T)
OpenSet cylinder_over_second(const Space& product_sp, const OpenSet& u_t);
// U x V as an open set of the binary product space
OpenSet product_opens(const Space& product_sp, const OpenSet& a, const OpenSet& b);
// {t in T : (s0, t) never mind} -- building block: box b1 x b2 x ... as an
// open set of the product space (finite union / exhaustion of true balls)
OpenSet cover_box(const Space& product_sp, const std::vector<std::vector<Ball>>& factor_balls);

// does the (certified) ball b1 contain the ball b2?  d(c1,c2) + r2 <= r1.
bool ball_contains(const Space& sp, const Ball& outer, const Ball& inner);

// membership semidecision: yes iff some ball provably contains the point,
// certificate d(x_s, center) + 2^-(s-1) < radius at some stage s <= fuel.
SemiBool member(const Point& x, const OpenSet& u, std::size_t fuel);

} // namespace disint
