#pragma once

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace appc {

using StateIndex = std::uint32_t;
using Weight = std::uint64_t;

struct Edge
{
    StateIndex to;
    Weight weight;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// A minimum run weight, or "unreachable". Unreachable orders after every
/// finite value and absorbs addition.
class Distance
{
public:
    constexpr Distance() = default;
    constexpr explicit Distance(Weight w) : value_(w) {}

    static constexpr Distance unreachable() { return Distance{}; }

    [[nodiscard]] constexpr bool reachable() const { return value_.has_value(); }
    [[nodiscard]] constexpr Weight value() const
    {
        if (!value_)
            throw std::logic_error("value() of an unreachable distance");
        return *value_;
    }

    friend constexpr Distance operator+(Distance a, Distance b)
    {
        if (!a.reachable() || !b.reachable())
            return unreachable();
        return Distance{*a.value_ + *b.value_};
    }
    friend constexpr Distance operator+(Distance a, Weight w)
    {
        return a.reachable() ? Distance{*a.value_ + w} : unreachable();
    }

    friend constexpr bool operator==(const Distance&, const Distance&) = default;
    friend constexpr std::strong_ordering operator<=>(const Distance& a, const Distance& b)
    {
        if (a.reachable() != b.reachable())
            return a.reachable() ? std::strong_ordering::less : std::strong_ordering::greater;
        if (!a.reachable())
            return std::strong_ordering::equal;
        return *a.value_ <=> *b.value_;
    }

private:
    std::optional<Weight> value_;
};

/// Anything with `size()` and `successors(v)` yielding `Edge`s.
template <class G>
concept WeightedDigraph = requires(const G& g, StateIndex v) {
    { g.size() } -> std::convertible_to<std::size_t>;
    { *std::begin(g.successors(v)) } -> std::convertible_to<const Edge&>;
};

/// Plain adjacency-list digraph, used for sub-graphs and in tests.
class AdjacencyGraph
{
public:
    AdjacencyGraph() = default;
    explicit AdjacencyGraph(std::size_t n) : succ_(n) {}

    void add_edge(StateIndex from, StateIndex to, Weight w) { succ_.at(from).push_back(Edge{to, w}); }

    [[nodiscard]] std::size_t size() const { return succ_.size(); }
    [[nodiscard]] std::span<const Edge> successors(StateIndex v) const { return succ_[v]; }

private:
    std::vector<std::vector<Edge>> succ_;
};

template <WeightedDigraph G>
std::vector<std::vector<Edge>> reverse_edges(const G& g)
{
    std::vector<std::vector<Edge>> pred(g.size());
    for (StateIndex v = 0; v < g.size(); ++v)
        for (const Edge& e : g.successors(v))
            pred[e.to].push_back(Edge{v, e.weight});
    return pred;
}

/// All-pairs minimum run weights (Floyd-Warshall). O(n^3); meant for
/// transition systems, not for products.
template <WeightedDigraph G>
std::vector<std::vector<Distance>> all_pairs_min_weights(const G& g)
{
    const std::size_t n = g.size();
    std::vector<std::vector<Distance>> d(n, std::vector<Distance>(n));
    for (StateIndex v = 0; v < n; ++v) {
        d[v][v] = Distance{0};
        for (const Edge& e : g.successors(v))
            d[v][e.to] = std::min(d[v][e.to], Distance{e.weight});
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (!d[i][k].reachable())
                continue;
            for (std::size_t j = 0; j < n; ++j) {
                Distance via = d[i][k] + d[k][j];
                if (via < d[i][j])
                    d[i][j] = via;
            }
        }
    return d;
}

/// Minimum run weight from every state to the nearest state of `targets`
/// (multi-source Dijkstra over the reversed graph).
template <WeightedDigraph G>
std::vector<Distance> distances_to(const G& g, std::span<const StateIndex> targets)
{
    const auto pred = reverse_edges(g);
    std::vector<Distance> dist(g.size());
    using Item = std::pair<Weight, StateIndex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (StateIndex t : targets) {
        dist.at(t) = Distance{0};
        queue.emplace(0, t);
    }
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (Distance{d} > dist[v])
            continue;
        for (const Edge& e : pred[v]) {
            Distance cand{d + e.weight};
            if (cand < dist[e.to]) {
                dist[e.to] = cand;
                queue.emplace(d + e.weight, e.to);
            }
        }
    }
    return dist;
}

/// Minimum number of transitions from every state to `targets`.
template <WeightedDigraph G>
std::vector<Distance> hops_to(const G& g, std::span<const StateIndex> targets)
{
    const auto pred = reverse_edges(g);
    std::vector<Distance> dist(g.size());
    std::queue<StateIndex> queue;
    for (StateIndex t : targets) {
        dist.at(t) = Distance{0};
        queue.push(t);
    }
    while (!queue.empty()) {
        StateIndex v = queue.front();
        queue.pop();
        for (const Edge& e : pred[v])
            if (!dist[e.to].reachable()) {
                dist[e.to] = dist[v] + Weight{1};
                queue.push(e.to);
            }
    }
    return dist;
}

struct SccDecomposition
{
    /// component[v] is the SCC id of v. Ids are in reverse topological order
    /// (Tarjan emission order): successors' components get smaller ids.
    std::vector<std::uint32_t> component;
    std::vector<std::vector<StateIndex>> members;
    /// True when the component contains at least one internal transition.
    std::vector<bool> nontrivial;
};

/// Tarjan's algorithm, iterative.
template <WeightedDigraph G>
SccDecomposition tarjan_scc(const G& g)
{
    constexpr std::uint32_t unvisited = UINT32_MAX;
    const std::size_t n = g.size();
    SccDecomposition out;
    out.component.assign(n, unvisited);
    std::vector<std::uint32_t> index(n, unvisited), low(n, 0);
    std::vector<bool> on_stack(n, false);
    std::vector<StateIndex> stack;
    std::uint32_t next_index = 0;

    struct Frame
    {
        StateIndex v;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (StateIndex root = 0; root < n; ++root) {
        if (index[root] != unvisited)
            continue;
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            Frame& f = call.back();
            auto succ = g.successors(f.v);
            auto begin = std::begin(succ);
            auto size = static_cast<std::size_t>(std::distance(begin, std::end(succ)));
            if (f.edge < size) {
                StateIndex w = std::next(begin, static_cast<std::ptrdiff_t>(f.edge))->to;
                ++f.edge;
                if (index[w] == unvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            StateIndex v = f.v;
            call.pop_back();
            if (!call.empty())
                low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                auto id = static_cast<std::uint32_t>(out.members.size());
                out.members.emplace_back();
                StateIndex w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    out.component[w] = id;
                    out.members.back().push_back(w);
                } while (w != v);
                std::sort(out.members.back().begin(), out.members.back().end());
            }
        }
    }

    out.nontrivial.assign(out.members.size(), false);
    for (StateIndex v = 0; v < n; ++v)
        for (const Edge& e : g.successors(v))
            if (out.component[e.to] == out.component[v])
                out.nontrivial[out.component[v]] = true;
    return out;
}

/// States from which some state in `targets` is reachable (including targets).
template <WeightedDigraph G>
std::vector<bool> can_reach(const G& g, std::span<const StateIndex> targets)
{
    std::vector<bool> mark(g.size(), false);
    std::vector<Distance> d = hops_to(g, targets);
    for (StateIndex v = 0; v < g.size(); ++v)
        mark[v] = d[v].reachable();
    return mark;
}

} // namespace appc
