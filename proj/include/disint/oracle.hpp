#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <vector>

#include "disint/space.hpp"

namespace disint {

// A set of naturals presented as a monotone enumeration: emit(n) is the
// finite set enumerated by stage n.  Monotonicity is enforced on read; a
// generator that retracts an element is a contract breach, not a datum.
class Enumeration {
  public:
    using Gen = std::function<std::set<unsigned long>(std::size_t)>;

    explicit Enumeration(Gen gen) : st_(std::make_shared<State>(std::move(gen))) {}

    std::set<unsigned long> emit(std::size_t stage) const;

    // ground-truth constructor: element e arrives at stage s
    static Enumeration finite(std::vector<std::pair<unsigned long, std::size_t>> arrivals);

  private:
    struct State {
        explicit State(Gen g) : gen(std::move(g)) {}
        Gen gen;
        std::mutex lock;
        std::vector<std::set<unsigned long>> memo;
    };
    std::shared_ptr<State> st_;
};

// How to answer membership queries against an enumeration.  Exact mode
// carries a per-query stage bound promised to dominate every witness; fuel
// mode freezes one stage for all queries and marks the answers unverified.
struct FuelPolicy {
    enum class Mode { ExactWithWitnessBound, FuelBounded };
    Mode mode;
    std::function<std::size_t(unsigned long)> bound;  // exact mode only
    std::size_t fuel = 0;                             // fuel mode only

    static FuelPolicy exact(std::function<std::size_t(unsigned long)> b) {
        return {Mode::ExactWithWitnessBound, std::move(b), 0};
    }
    static FuelPolicy fueled(std::size_t f) { return {Mode::FuelBounded, nullptr, f}; }
};

struct EcResult {
    std::function<bool(unsigned long)> chi;
    bool verified;  // a 1-answer is always correct; 0-answers only if verified
};

EcResult ec(const Enumeration& x, const FuelPolicy& policy);

// Limit of a fast-Cauchy sequence of Cantor points (d(x_n, x_{n+1}) < 2^-n):
// bit i of the output is bit i of seq(i + 2), which the ultrametric bound
// has already stabilized.  Blatant bound violations (certifiable from tag
// distances, which the ultrametric makes exact) raise CauchyViolation.
Point lim_baire(std::function<Point(std::size_t)> seq);

// A realizer: a monotone transformer of finite name prefixes (names are
// streams of naturals).  Longer input must never retract emitted output;
// run() enforces this while driving the transformer against an input stream.
class Realizer {
  public:
    using Fn = std::function<std::vector<unsigned long>(const std::vector<unsigned long>&)>;

    explicit Realizer(Fn f) : fn_(std::move(f)) {}

    std::vector<unsigned long> transform(const std::vector<unsigned long>& prefix) const {
        return fn_(prefix);
    }

    struct TraceRecord {
        std::size_t stage;
        std::size_t demanded;
        std::size_t emitted;
    };

    // Feed ever-longer prefixes of `input` until `out_len` output symbols
    // exist; throws InputDemandExceeded past `demand_cap` input symbols and
    // ContractError if the transformer retracts output.
    std::vector<unsigned long> run(std::function<unsigned long(std::size_t)> input,
                                   std::size_t out_len, std::size_t demand_cap = (1u << 20),
                                   std::vector<TraceRecord>* trace = nullptr) const;

    static Realizer identity() {
        return Realizer([](const std::vector<unsigned long>& p) { return p; });
    }

  private:
    Fn fn_;
};

enum class ComposeShape { Strong, Weak };

// Composition shapes for reductions: strong is h . g . k; weak is
// h . <id, g . k> with the even/odd interleaving as the pairing bijection.
Realizer weihrauch_compose(const Realizer& h, const Realizer& k, const Realizer& g,
                           ComposeShape shape);

// name encoding for enumerations: one symbol per stage, element e encoded as
// e + 1, with 0 as padding when nothing new arrives.  The stage is the
// stream position, which keeps replay deterministic.
std::function<unsigned long(std::size_t)> enumeration_name(const Enumeration& x);
Enumeration enumeration_from_name(std::function<unsigned long(std::size_t)> name);

} // namespace disint
