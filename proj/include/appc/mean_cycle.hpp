#pragma once

#include "appc/error.hpp"
#include "appc/graph.hpp"
#include "appc/rational.hpp"
#include "appc/transition_system.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace appc {

struct ReducedEdge
{
    StateIndex from; // vertex of the original graph
    StateIndex to;
    Rational weight; // sum of per-state costs along `run`
    FiniteRun run;   // starts at `from`, excludes `to`
};

/// Graph over the surveillance states of a component in which every edge is
/// a cheapest run completing exactly one surveillance cycle.
struct ReducedSystem
{
    std::vector<StateIndex> states; // ascending
    std::vector<ReducedEdge> edges; // sorted by (from, to), at most one per pair
};

namespace detail {

// Runs are built by repeated concatenation; sharing pieces keeps each
// elimination O(1) per stored run.
struct RunPiece
{
    StateIndex leaf = 0;
    std::shared_ptr<const RunPiece> left, right;
};
using RunPtr = std::shared_ptr<const RunPiece>;

inline RunPtr concat(RunPtr a, RunPtr b)
{
    auto p = std::make_shared<RunPiece>();
    p->left = std::move(a);
    p->right = std::move(b);
    return p;
}

inline FiniteRun flatten(const RunPtr& root)
{
    FiniteRun out;
    std::vector<const RunPiece*> stack{root.get()};
    while (!stack.empty()) {
        const RunPiece* p = stack.back();
        stack.pop_back();
        if (!p->left) {
            out.states.push_back(p->leaf);
            continue;
        }
        stack.push_back(p->right.get());
        stack.push_back(p->left.get());
    }
    return out;
}

struct PendingEdge
{
    Rational weight;
    RunPtr run;
};

} // namespace detail

/// Eliminates the non-surveillance states of `members` one at a time in
/// ascending order. For each eliminated x and each pair of neighbours
/// u1 -> x -> u2 (both distinct from x), the run through x replaces the
/// stored u1 -> u2 run when its cost is no larger. `cost[v]` is the
/// per-visit cost of state v.
template <WeightedDigraph G>
ReducedSystem reduce_ascc(const G& g, std::span<const StateIndex> members, const std::vector<bool>& surveillance,
                          const std::vector<Rational>& cost)
{
    std::vector<StateIndex> sorted(members.begin(), members.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    auto local = [&](StateIndex v) -> std::optional<std::size_t> {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
        if (it == sorted.end() || *it != v)
            return std::nullopt;
        return static_cast<std::size_t>(it - sorted.begin());
    };

    std::vector<std::map<std::size_t, detail::PendingEdge>> out(n);
    std::vector<std::map<std::size_t, bool>> in(n);
    std::vector<detail::RunPtr> leaf(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto p = std::make_shared<detail::RunPiece>();
        p->leaf = sorted[i];
        leaf[i] = std::move(p);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (const Edge& e : g.successors(sorted[i]))
            if (auto j = local(e.to)) {
                out[i].try_emplace(*j, detail::PendingEdge{cost[sorted[i]], leaf[i]});
                in[*j][i] = true;
            }

    for (std::size_t x = 0; x < n; ++x) {
        if (surveillance[sorted[x]])
            continue;
        for (const auto& [u1, _] : in[x]) {
            if (u1 == x)
                continue;
            const auto& first = out[u1].at(x);
            for (const auto& [u2, second] : out[x]) {
                if (u2 == x)
                    continue;
                Rational through = first.weight + second.weight;
                auto it = out[u1].find(u2);
                if (it == out[u1].end()) {
                    out[u1].emplace(u2, detail::PendingEdge{through, detail::concat(first.run, second.run)});
                    in[u2][u1] = true;
                } else if (through <= it->second.weight) {
                    it->second = detail::PendingEdge{through, detail::concat(first.run, second.run)};
                }
            }
        }
        for (const auto& [u1, _] : in[x])
            if (u1 != x)
                out[u1].erase(x);
        for (const auto& [u2, _] : out[x])
            if (u2 != x)
                in[u2].erase(x);
        out[x].clear();
        in[x].clear();
    }

    ReducedSystem red;
    for (std::size_t i = 0; i < n; ++i) {
        if (!surveillance[sorted[i]])
            continue;
        red.states.push_back(sorted[i]);
        for (const auto& [j, e] : out[i])
            red.edges.push_back(ReducedEdge{sorted[i], sorted[j], e.weight, detail::flatten(e.run)});
    }
    return red;
}

struct WeightedArc
{
    std::uint32_t from;
    std::uint32_t to;
    Rational weight;
};

struct MeanCycle
{
    Rational mean;
    std::vector<std::uint32_t> cycle; // vertex sequence, closing arc implicit
};

namespace detail {

/// Vertices reachable from `from` through allowed vertices of the tight graph.
inline bool reaches(const std::vector<std::vector<std::uint32_t>>& tight, std::uint32_t from, std::uint32_t target,
                    const std::vector<bool>& allowed)
{
    std::vector<bool> seen(tight.size(), false);
    std::vector<std::uint32_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        std::uint32_t v = stack.back();
        stack.pop_back();
        for (std::uint32_t w : tight[v]) {
            if (w == target)
                return true;
            if (allowed[w] && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return false;
}

} // namespace detail

/// Karp's minimum mean cycle over vertices 0..n-1, exact. Parallel arcs keep
/// the lighter one. The witness is the lexicographically smallest
/// elementary cycle attaining the mean, written from its smallest vertex.
inline MeanCycle karp_min_mean(std::size_t n, std::span<const WeightedArc> arcs)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, Rational> best;
    for (const auto& a : arcs) {
        if (a.from >= n || a.to >= n)
            throw std::invalid_argument("arc endpoint out of range");
        auto [it, inserted] = best.try_emplace({a.from, a.to}, a.weight);
        if (!inserted && a.weight < it->second)
            it->second = a.weight;
    }
    if (best.empty())
        throw Error("graph has no cycle");

    // walk[k][v]: lightest walk of exactly k arcs ending at v, from any start.
    std::vector<std::vector<std::optional<Rational>>> walk(n + 1, std::vector<std::optional<Rational>>(n));
    for (std::size_t v = 0; v < n; ++v)
        walk[0][v] = Rational(0);
    for (std::size_t k = 1; k <= n; ++k)
        for (const auto& [edge, w] : best) {
            const auto& prev = walk[k - 1][edge.first];
            if (!prev)
                continue;
            Rational cand = *prev + w;
            auto& cur = walk[k][edge.second];
            if (!cur || cand < *cur)
                cur = cand;
        }

    std::optional<Rational> lambda;
    for (std::size_t v = 0; v < n; ++v) {
        if (!walk[n][v])
            continue;
        std::optional<Rational> worst;
        for (std::size_t k = 0; k < n; ++k) {
            if (!walk[k][v])
                continue;
            Rational ratio = (*walk[n][v] - *walk[k][v]) / static_cast<long>(n - k);
            if (!worst || ratio > *worst)
                worst = ratio;
        }
        if (worst && (!lambda || *worst < *lambda))
            lambda = worst;
    }
    if (!lambda)
        throw Error("graph has no cycle");
    lambda->canonicalize();

    // Potentials for the arc costs w - lambda (no negative cycles); arcs with
    // zero reduced cost are exactly the arcs of minimum-mean cycles.
    std::vector<Rational> pot(n, Rational(0));
    for (std::size_t round = 0; round < n; ++round) {
        bool changed = false;
        for (const auto& [edge, w] : best) {
            Rational cand = pot[edge.first] + w - *lambda;
            if (cand < pot[edge.second]) {
                pot[edge.second] = cand;
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    std::vector<std::vector<std::uint32_t>> tight(n);
    for (const auto& [edge, w] : best)
        if (pot[edge.first] + w - *lambda == pot[edge.second])
            tight[edge.first].push_back(edge.second);
    for (auto& t : tight)
        std::sort(t.begin(), t.end());

    for (std::uint32_t s = 0; s < n; ++s) {
        std::vector<bool> allowed(n, false);
        for (std::uint32_t v = s; v < n; ++v)
            allowed[v] = true;
        if (!detail::reaches(tight, s, s, allowed))
            continue;
        MeanCycle out{*lambda, {s}};
        allowed[s] = false;
        std::uint32_t cur = s;
        for (;;) {
            if (std::binary_search(tight[cur].begin(), tight[cur].end(), s))
                return out;
            std::optional<std::uint32_t> step;
            for (std::uint32_t w : tight[cur]) {
                if (!allowed[w])
                    continue;
                allowed[w] = false;
                bool ok = detail::reaches(tight, w, s, allowed);
                allowed[w] = true;
                if (ok) {
                    step = w;
                    break;
                }
            }
            if (!step)
                throw std::logic_error("minimum mean cycle reconstruction failed");
            allowed[*step] = false;
            out.cycle.push_back(*step);
            cur = *step;
        }
    }
    throw std::logic_error("no tight cycle for the minimum mean");
}

struct OptimalCycle
{
    Rational appc_value;
    FiniteRun cycle;                               // closing transition implicit
    std::vector<std::size_t> surveillance_positions; // indices into cycle.states
};

/// Expands the minimum mean cycle of the reduced system into a cycle of the
/// original graph. Each reduced edge completes one surveillance cycle, so
/// the mean is the per-cycle cost.
inline OptimalCycle optimal_cycle(const ReducedSystem& red)
{
    std::vector<WeightedArc> arcs;
    auto local = [&](StateIndex v) {
        return static_cast<std::uint32_t>(std::lower_bound(red.states.begin(), red.states.end(), v) -
                                          red.states.begin());
    };
    for (const auto& e : red.edges)
        arcs.push_back(WeightedArc{local(e.from), local(e.to), e.weight});
    MeanCycle mc = karp_min_mean(red.states.size(), arcs);

    OptimalCycle out{mc.mean, {}, {}};
    for (std::size_t i = 0; i < mc.cycle.size(); ++i) {
        StateIndex from = red.states[mc.cycle[i]];
        StateIndex to = red.states[mc.cycle[(i + 1) % mc.cycle.size()]];
        auto it = std::lower_bound(red.edges.begin(), red.edges.end(), std::make_pair(from, to),
                                   [](const ReducedEdge& e, const std::pair<StateIndex, StateIndex>& key) {
                                       return std::make_pair(e.from, e.to) < key;
                                   });
        out.surveillance_positions.push_back(out.cycle.states.size());
        out.cycle.states.insert(out.cycle.states.end(), it->run.states.begin(), it->run.states.end());
    }
    return out;
}

/// Cost per surveillance visit of a cycle, recomputed from its states.
inline Rational cycle_mean_cost(const FiniteRun& cycle, const std::vector<bool>& surveillance,
                                const std::vector<Rational>& cost)
{
    Rational total = 0;
    long visits = 0;
    for (StateIndex v : cycle.states) {
        total += cost[v];
        if (surveillance[v])
            ++visits;
    }
    if (visits == 0)
        throw std::invalid_argument("cycle has no surveillance state");
    total /= visits;
    total.canonicalize();
    return total;
}

} // namespace appc
