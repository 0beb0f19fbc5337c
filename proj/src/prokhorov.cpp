#include "disint/prokhorov.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "disint/errors.hpp"

namespace disint {

namespace {

// exact-rational max flow, plain Edmonds-Karp; graphs here are tiny
struct FlowNet {
    struct Edge {
        int to;
        Rational cap;
        std::size_t rev;
    };
    std::vector<std::vector<Edge>> adj;

    explicit FlowNet(int n) : adj(n) {}

    void add(int a, int b, const Rational& cap) {
        adj[a].push_back({b, cap, adj[b].size()});
        adj[b].push_back({a, Rational(0), adj[a].size() - 1});
    }

    Rational max_flow(int s, int t) {
        Rational total(0);
        for (;;) {
            std::vector<std::pair<int, std::size_t>> parent(adj.size(), {-1, 0});
            std::deque<int> q{s};
            parent[s] = {s, 0};
            while (!q.empty() && parent[t].first < 0) {
                int u = q.front();
                q.pop_front();
                for (std::size_t k = 0; k < adj[u].size(); ++k) {
                    const Edge& e = adj[u][k];
                    if (e.cap.sign() > 0 && parent[e.to].first < 0) {
                        parent[e.to] = {u, k};
                        q.push_back(e.to);
                    }
                }
            }
            if (parent[t].first < 0) return total;
            Rational push(2); // more than any capacity here
            for (int v = t; v != s;) {
                auto [u, k] = parent[v];
                push = min(push, adj[u][k].cap);
                v = u;
            }
            for (int v = t; v != s;) {
                auto [u, k] = parent[v];
                adj[u][k].cap -= push;
                adj[adj[u][k].to][adj[u][k].rev].cap += push;
                v = u;
            }
            total += push;
        }
    }
};

std::vector<std::pair<Tag, Rational>> merged(const FiniteAtoms& m) {
    std::map<Tag, Rational> acc;
    for (const auto& [t, w] : m.atoms) {
        auto [it, fresh] = acc.emplace(t, w);
        if (!fresh) it->second += w;
    }
    return {acc.begin(), acc.end()};
}

} // namespace

bool prokhorov_feasible(const FiniteAtoms& mu, const FiniteAtoms& nu, const Rational& eps) {
    auto xs = merged(mu);
    auto ys = merged(nu);
    int n = static_cast<int>(xs.size()), m = static_cast<int>(ys.size());
    FlowNet net(n + m + 2);
    int src = 0, snk = n + m + 1;
    for (int i = 0; i < n; ++i) net.add(src, 1 + i, xs[i].second);
    for (int j = 0; j < m; ++j) net.add(1 + n + j, snk, ys[j].second);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            if (mu.sp.dense_metric(xs[i].first, ys[j].first) < eps)
                net.add(1 + i, 1 + n + j, Rational(2));
    return net.max_flow(src, snk) >= Rational(1) - eps;
}

LocatedReal prokhorov(const FiniteAtoms& mu, const FiniteAtoms& nu) {
    if (!(mu.sp == nu.sp)) throw SpaceMismatch("prokhorov across different spaces");
    if (merged(mu) == merged(nu)) return LocatedReal(Rational(0)); // exact zero fast path
    FiniteAtoms a = mu, b = nu;
    return LocatedReal([a, b](long p) {
        // invariant: lo infeasible (or 0), hi feasible; eps = 1 always is
        Rational lo(0), hi(1);
        for (long step = 0; step <= p; ++step) {
            Rational mid = (lo + hi) / Rational(2);
            if (prokhorov_feasible(a, b, mid))
                hi = mid;
            else
                lo = mid;
        }
        return Interval{lo, hi};
    });
}

} // namespace disint
