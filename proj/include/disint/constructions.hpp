#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "disint/interval.hpp"
#include "disint/measure.hpp"
#include "disint/oracle.hpp"
#include "disint/space.hpp"

namespace disint {

// Monotone witness table: y(m, n) in {0,1}, nondecreasing in n.  Encodes a
// semidecidable set as "m is in iff some column witnesses it"; iota(m) is the
// first witnessing column (infinity if none), searchable only boundedly.
class WitnessTable {
  public:
    using Fn = std::function<bool(unsigned long, std::size_t)>;

    explicit WitnessTable(Fn y) : st_(std::make_shared<State>(std::move(y))) {}

    bool y(unsigned long m, std::size_t n) const;

    // least k <= fuel with y(m, k) = 1, nullopt meaning "iota(m) > fuel"
    std::optional<std::size_t> iota(unsigned long m, std::size_t fuel) const;

    static WitnessTable from_enumeration(const Enumeration& x);
    static WitnessTable ground_truth(std::vector<std::pair<unsigned long, std::size_t>> arrivals);

  private:
    struct State {
        explicit State(Fn f) : fn(std::move(f)) {}
        Fn fn;
        std::mutex mu;
        // per row: largest column seen false, smallest seen true (monotone check)
        std::map<unsigned long, std::pair<std::optional<std::size_t>, std::optional<std::size_t>>>
            seen;
    };
    std::shared_ptr<State> st_;
};

// open dyadic interval (i/2^m, j/2^m)
struct DyadicInterval {
    unsigned long i, j, m;

    DyadicInterval(unsigned long i_, unsigned long j_, unsigned long m_);
    Rational lo() const;
    Rational hi() const;
    Rational length() const { return hi() - lo(); }
};

WitnessTable witness_table(const Enumeration& x);

// Measure on N x [0,1]: row 2m has density 2^-(m+2) (1 + cos(2^(iota(m)+1) pi z)),
// row 2m+1 the complementary 2^-(m+2) (1 - cos(...)); rows with unwitnessed m
// are flat.  Row densities sum to 1 pointwise, so the second marginal is
// Lebesgue.  Dyadic windows coarser than the wave are evaluated exactly.
Measure mu_x(const WitnessTable& y);

// The same rows pushed onto N x 2^w through the binary-digit map: cylinder
// [w] carries the mu_x mass of (0.w, 0.w + 2^-|w|).
Measure eta_x(const WitnessTable& y);

// Pushforward of a measure on N x [0,1] onto [0,1]^2 along alpha x id,
// alpha(n) = 2^-(n+1); the balls embed_phi(n) separate the rows, making
// discrete conditionals readable off the square.
Measure embed_discrete(const Measure& mu);
Rational embed_alpha(unsigned long n);
Ball embed_phi(unsigned long n);  // ball in [0,1] with alpha-preimage {n}

// Decodes a bit stream into the set of k such that the marker 0(1^k 0)^n
// occurs at (0-based) position n for some n >= 1; k enters at the stage equal
// to the marker's end offset.  rho_inverse builds a faithful preimage: its
// output contains the substring 0 1^k 0 only for k in the set.
Enumeration rho(const Point& s);
Point rho_inverse(const Enumeration& x);

// least marker-end offset for k inside the given bit prefix, if any
std::optional<std::size_t> marker_scan(const std::vector<bool>& bits, unsigned long k);

// lambda-mass of {s extending prefix : marker for k completes somewhere},
// enclosed by exact counting up to `horizon` bits plus a union-bound tail.
Interval marker_completion_mass(const std::vector<bool>& prefix, unsigned long k,
                                std::size_t horizon);

// Mixture on N x (2^w x 2^w): integrate eta over the decoded set of the
// second 2^w coordinate under the uniform measure.  Cylinder-box probes
// evaluate by exact finite decomposition: branches that decide the decoder
// within the box resolution carry closed-form values, and every undecided
// branch is provably flat at that resolution.
Measure mixture();

// Reads bit k off a conditional on N whose even atoms take one of the two
// calibrated values 2^-(k+2) (bit 0) or 2^-(k+1) (bit 1); decides by interval
// separation at precision k+4 and a few refinements beyond.
bool recover_bit(const Measure& nu, unsigned long k);
std::function<bool(unsigned long)> recover_x(const Measure& nu);

// {n} x T as a finite union of true balls of product(N, T); T must be
// coverable by unit balls (unit interval, 2^w, finite products of those)
OpenSet row_cylinder(const Space& sp, unsigned long n);

} // namespace disint
