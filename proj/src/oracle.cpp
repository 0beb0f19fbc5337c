#include "disint/oracle.hpp"

#include <algorithm>
#include <deque>

#include "disint/errors.hpp"

namespace disint {

std::set<unsigned long> Enumeration::emit(std::size_t stage) const {
    std::scoped_lock lk(st_->lock);
    while (st_->memo.size() <= stage) {
        std::size_t s = st_->memo.size();
        std::set<unsigned long> now = st_->gen(s);
        if (s > 0) {
            const auto& prev = st_->memo[s - 1];
            if (!std::includes(now.begin(), now.end(), prev.begin(), prev.end()))
                throw ContractError("enumeration retracted an element at stage " + std::to_string(s));
        }
        st_->memo.push_back(std::move(now));
    }
    return st_->memo[stage];
}

Enumeration Enumeration::finite(std::vector<std::pair<unsigned long, std::size_t>> arrivals) {
    auto arr = std::make_shared<std::vector<std::pair<unsigned long, std::size_t>>>(std::move(arrivals));
    return Enumeration([arr](std::size_t stage) {
        std::set<unsigned long> out;
        for (const auto& [e, s] : *arr)
            if (s <= stage) out.insert(e);
        return out;
    });
}

EcResult ec(const Enumeration& x, const FuelPolicy& policy) {
    if (policy.mode == FuelPolicy::Mode::ExactWithWitnessBound) {
        if (!policy.bound) throw ContractError("ec: exact policy requires a witness bound");
        auto bound = policy.bound;
        return EcResult{
            [x, bound](unsigned long m) { return x.emit(bound(m)).count(m) > 0; },
            true};
    }
    std::size_t fuel = policy.fuel;
    return EcResult{
        [x, fuel](unsigned long m) { return x.emit(fuel).count(m) > 0; },
        false};
}

Point lim_baire(std::function<Point(std::size_t)> seq) {
    Space sp = Space::cantor();
    if (seq(0).space().kind() != Space::Kind::Cantor)
        throw SpaceMismatch("lim_baire expects a sequence of Cantor points");

    struct Check {
        std::mutex mu;
        std::size_t done = 0;  // consecutive pairs (n, n+1) already spot-checked
    };
    auto chk = std::make_shared<Check>();
    auto spot = [sp, seq, chk](std::size_t upto) {
        std::scoped_lock lk(chk->mu);
        for (std::size_t n = chk->done; n < upto; ++n) {
            long q = static_cast<long>(n) + 4;
            Rational dd = sp.dense_metric(seq(n).at(q), seq(n + 1).at(q));
            // tag distance >= 2^-n exceeds both tag errors (< 2^-(q-1)), so the
            // ultrametric makes it the exact distance: a certain breach.
            if (dd >= Rational::pow2(-static_cast<long>(n)))
                throw CauchyViolation("lim_baire: d(x_" + std::to_string(n) + ", x_" +
                                      std::to_string(n + 1) + ") = " + dd.str() +
                                      " breaks the fast-Cauchy bound");
            chk->done = n + 1;
        }
    };

    return Point::cantor_stream([sp, seq, spot](std::size_t i) {
        spot(std::min<std::size_t>(i + 2, 8));
        Point xi = seq(i + 2);
        // the tag at precision i+2 fixes bits 0..i of x_{i+2}, which the
        // fast-Cauchy bound has already frozen in the limit
        std::vector<bool> w = sp.cantor_word(xi.at(static_cast<long>(i) + 2));
        return i < w.size() && w[i];
    });
}

std::vector<unsigned long> Realizer::run(std::function<unsigned long(std::size_t)> input,
                                         std::size_t out_len, std::size_t demand_cap,
                                         std::vector<TraceRecord>* trace) const {
    std::vector<unsigned long> prefix;
    std::vector<unsigned long> prev;
    std::size_t demanded = 0;
    std::size_t stage = 0;
    for (;;) {
        while (prefix.size() < demanded) prefix.push_back(input(prefix.size()));
        std::vector<unsigned long> out = fn_(prefix);
        if (out.size() < prev.size() || !std::equal(prev.begin(), prev.end(), out.begin()))
            throw ContractError("realizer retracted output at demand " + std::to_string(demanded));
        if (trace) trace->push_back({stage, demanded, out.size()});
        if (out.size() >= out_len) {
            out.resize(out_len);
            return out;
        }
        prev = std::move(out);
        demanded = demanded == 0 ? 1 : demanded * 2;
        if (demanded > demand_cap)
            throw InputDemandExceeded("realizer demanded more than " + std::to_string(demand_cap) +
                                      " input symbols for " + std::to_string(out_len) + " outputs");
        ++stage;
    }
}

Realizer weihrauch_compose(const Realizer& h, const Realizer& k, const Realizer& g,
                           ComposeShape shape) {
    if (shape == ComposeShape::Strong)
        return Realizer([h, k, g](const std::vector<unsigned long>& p) {
            return h.transform(g.transform(k.transform(p)));
        });
    return Realizer([h, k, g](const std::vector<unsigned long>& p) {
        std::vector<unsigned long> q = g.transform(k.transform(p));
        std::vector<unsigned long> paired;
        for (std::size_t j = 0;; ++j) {
            std::size_t idx = j / 2;
            const auto& side = (j % 2 == 0) ? p : q;
            if (idx >= side.size()) break;
            paired.push_back(side[idx]);
        }
        return h.transform(paired);
    });
}

std::function<unsigned long(std::size_t)> enumeration_name(const Enumeration& x) {
    struct State {
        std::mutex mu;
        std::vector<unsigned long> symbols;
        std::deque<unsigned long> pending;
        std::set<unsigned long> seen;
        std::size_t next_stage = 0;
    };
    auto st = std::make_shared<State>();
    return [x, st](std::size_t n) {
        std::scoped_lock lk(st->mu);
        while (st->symbols.size() <= n) {
            std::set<unsigned long> cur = x.emit(st->next_stage++);
            for (unsigned long e : cur)
                if (!st->seen.count(e)) st->pending.push_back(e);
            st->seen = std::move(cur);
            if (st->pending.empty()) {
                st->symbols.push_back(0);  // padding
            } else {
                st->symbols.push_back(st->pending.front() + 1);
                st->pending.pop_front();
            }
        }
        return st->symbols[n];
    };
}

Enumeration enumeration_from_name(std::function<unsigned long(std::size_t)> name) {
    return Enumeration([name](std::size_t stage) {
        std::set<unsigned long> out;
        for (std::size_t i = 0; i < stage; ++i) {
            unsigned long sym = name(i);
            if (sym != 0) out.insert(sym - 1);
        }
        return out;
    });
}

} // namespace disint
