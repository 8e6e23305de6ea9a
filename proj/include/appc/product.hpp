#pragma once

#include "appc/buchi.hpp"
#include "appc/error.hpp"
#include "appc/graph.hpp"
#include "appc/transition_system.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace appc {

struct ProductState
{
    StateIndex ts;
    std::uint32_t ba;

    friend bool operator==(const ProductState&, const ProductState&) = default;
    friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

/// Reachable, dead-end-free fragment of TS x BA. The automaton reads the
/// label of the source state: ((s,q),(s',q')) exists iff s -> s' and
/// q --L(s)--> q'. States are indexed in (ts, ba) order.
class Product
{
public:
    [[nodiscard]] std::size_t size() const { return states_.size(); }
    [[nodiscard]] std::span<const Edge> successors(StateIndex v) const { return succ_[v]; }
    [[nodiscard]] StateIndex initial() const { return initial_; }
    [[nodiscard]] const ProductState& state(StateIndex v) const { return states_[v]; }
    [[nodiscard]] StateIndex ts_state(StateIndex v) const { return states_[v].ts; }
    [[nodiscard]] bool accepting(StateIndex v) const { return ba_.accepting[states_[v].ba]; }
    [[nodiscard]] const TransitionSystem& ts() const { return ts_; }
    [[nodiscard]] const BuchiAutomaton& ba() const { return ba_; }
    [[nodiscard]] const std::set<std::string>& labels(StateIndex v) const { return ts_.labels(states_[v].ts); }
    /// Atoms of the formula that no TS state declares.
    [[nodiscard]] const std::vector<std::string>& unknown_atoms() const { return unknown_atoms_; }

    [[nodiscard]] std::string id(StateIndex v) const
    {
        return ts_.id(states_[v].ts) + "|q" + std::to_string(states_[v].ba);
    }

    [[nodiscard]] std::optional<StateIndex> index_of(const ProductState& s) const
    {
        auto it = std::lower_bound(states_.begin(), states_.end(), s);
        if (it == states_.end() || *it != s)
            return std::nullopt;
        return static_cast<StateIndex>(it - states_.begin());
    }

    [[nodiscard]] std::optional<StateIndex> index_of(const std::string& id) const
    {
        auto bar = id.rfind("|q");
        if (bar == std::string::npos)
            return std::nullopt;
        auto ts = ts_.index_of(id.substr(0, bar));
        if (!ts)
            return std::nullopt;
        try {
            std::size_t used = 0;
            unsigned long q = std::stoul(id.substr(bar + 2), &used);
            if (used != id.size() - bar - 2)
                return std::nullopt;
            return index_of(ProductState{*ts, static_cast<std::uint32_t>(q)});
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }

    [[nodiscard]] std::vector<StateIndex> accepting_states() const
    {
        std::vector<StateIndex> out;
        for (StateIndex v = 0; v < size(); ++v)
            if (accepting(v))
                out.push_back(v);
        return out;
    }

    [[nodiscard]] std::size_t transition_count() const
    {
        std::size_t n = 0;
        for (const auto& out : succ_)
            n += out.size();
        return n;
    }

    friend Product build_product(const TransitionSystem& ts, const BuchiAutomaton& ba);

private:
    Product(TransitionSystem ts, BuchiAutomaton ba) : ts_(std::move(ts)), ba_(std::move(ba)) {}

    TransitionSystem ts_;
    BuchiAutomaton ba_;
    std::vector<ProductState> states_;
    std::vector<std::vector<Edge>> succ_;
    StateIndex initial_ = 0;
    std::vector<std::string> unknown_atoms_;
};

/// Throws UnsatisfiableError when the initial state has no infinite run.
inline Product build_product(const TransitionSystem& ts, const BuchiAutomaton& ba)
{
    Product p(ts, ba);
    for (const auto& atom : ba.atoms)
        if (!std::binary_search(ts.ap().begin(), ts.ap().end(), atom))
            p.unknown_atoms_.push_back(atom);

    std::vector<std::uint64_t> letter(ts.size());
    for (StateIndex s = 0; s < ts.size(); ++s)
        letter[s] = ba.letter(ts.labels(s));

    // Forward exploration.
    std::map<ProductState, std::uint32_t> seen;
    std::vector<ProductState> order;
    std::vector<std::vector<std::uint32_t>> succ;
    auto visit = [&](ProductState s) {
        auto [it, inserted] = seen.try_emplace(s, static_cast<std::uint32_t>(order.size()));
        if (inserted) {
            order.push_back(s);
            succ.emplace_back();
        }
        return it->second;
    };
    visit(ProductState{ts.initial(), ba.initial});
    for (std::size_t i = 0; i < order.size(); ++i) {
        const ProductState cur = order[i];
        std::vector<std::uint32_t> targets;
        for (const auto& be : ba.edges[cur.ba]) {
            if (!be.guard.admits(letter[cur.ts]))
                continue;
            for (const Edge& te : ts.successors(cur.ts))
                targets.push_back(visit(ProductState{te.to, be.to}));
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        succ[i] = std::move(targets);
    }

    // Remove dead ends until every remaining state has a successor.
    const std::size_t n = order.size();
    std::vector<std::vector<std::uint32_t>> pred(n);
    std::vector<std::size_t> out_degree(n);
    for (std::uint32_t v = 0; v < n; ++v) {
        out_degree[v] = succ[v].size();
        for (std::uint32_t w : succ[v])
            pred[w].push_back(v);
    }
    std::vector<bool> alive(n, true);
    std::vector<std::uint32_t> dead;
    for (std::uint32_t v = 0; v < n; ++v)
        if (out_degree[v] == 0)
            dead.push_back(v);
    while (!dead.empty()) {
        std::uint32_t v = dead.back();
        dead.pop_back();
        if (!alive[v])
            continue;
        alive[v] = false;
        for (std::uint32_t u : pred[v])
            if (alive[u] && --out_degree[u] == 0)
                dead.push_back(u);
    }
    if (!alive[0])
        throw UnsatisfiableError("specification is unsatisfiable from the initial state (empty product)");

    std::vector<std::uint32_t> keep;
    for (std::uint32_t v = 0; v < n; ++v)
        if (alive[v])
            keep.push_back(v);
    std::sort(keep.begin(), keep.end(), [&](std::uint32_t a, std::uint32_t b) { return order[a] < order[b]; });
    std::vector<StateIndex> renumber(n, 0);
    for (std::size_t k = 0; k < keep.size(); ++k)
        renumber[keep[k]] = static_cast<StateIndex>(k);

    p.states_.reserve(keep.size());
    p.succ_.reserve(keep.size());
    for (std::uint32_t v : keep) {
        p.states_.push_back(order[v]);
        std::vector<Edge> edges;
        for (std::uint32_t w : succ[v])
            if (alive[w])
                edges.push_back(Edge{renumber[w], *ts.weight(order[v].ts, order[w].ts)});
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
        p.succ_.push_back(std::move(edges));
    }
    p.initial_ = renumber[0];
    return p;
}

inline FiniteRun project_run(const Product& p, const FiniteRun& run)
{
    FiniteRun out;
    out.states.reserve(run.states.size());
    for (StateIndex v : run.states)
        out.states.push_back(p.ts_state(v));
    return out;
}

/// A nontrivial SCC of the product with at least one accepting state.
struct Ascc
{
    std::vector<StateIndex> states;       // ascending
    std::vector<StateIndex> accepting;    // F_U
    std::vector<StateIndex> surveillance; // states whose TS state carries the surveillance prop

    [[nodiscard]] bool contains(StateIndex v) const { return std::binary_search(states.begin(), states.end(), v); }
};

struct AsccAnalysis
{
    std::vector<Ascc> candidates;
    /// ASCCs without surveillance states; excluded from optimization.
    std::vector<Ascc> excluded;
};

/// Every state of a product is reachable from its initial state, so every
/// accepting SCC qualifies. Throws UnsatisfiableError if there are none.
inline AsccAnalysis accepting_sccs(const Product& p, const std::string& surveillance_prop)
{
    auto scc = tarjan_scc(p);
    AsccAnalysis out;
    std::vector<Ascc> all;
    for (std::size_t c = 0; c < scc.members.size(); ++c) {
        if (!scc.nontrivial[c])
            continue;
        Ascc u;
        u.states = scc.members[c];
        for (StateIndex v : u.states) {
            if (p.accepting(v))
                u.accepting.push_back(v);
            if (p.labels(v).contains(surveillance_prop))
                u.surveillance.push_back(v);
        }
        if (!u.accepting.empty())
            all.push_back(std::move(u));
    }
    if (all.empty())
        throw UnsatisfiableError("no reachable accepting SCC");
    std::sort(all.begin(), all.end(), [](const Ascc& a, const Ascc& b) { return a.states.front() < b.states.front(); });
    for (auto& u : all)
        (u.surveillance.empty() ? out.excluded : out.candidates).push_back(std::move(u));
    return out;
}

/// Same layout as the model file, plus the accepting list.
inline nlohmann::json product_to_json(const Product& p)
{
    nlohmann::json out;
    std::vector<std::string> ids;
    ids.reserve(p.size());
    for (StateIndex v = 0; v < p.size(); ++v)
        ids.push_back(p.id(v));
    out["states"] = ids;
    out["ap"] = p.ts().ap();
    nlohmann::json labels = nlohmann::json::object();
    nlohmann::json transitions = nlohmann::json::array();
    std::vector<std::string> accepting;
    for (StateIndex v = 0; v < p.size(); ++v) {
        if (!p.labels(v).empty())
            labels[ids[v]] = std::vector<std::string>(p.labels(v).begin(), p.labels(v).end());
        for (const Edge& e : p.successors(v))
            transitions.push_back({ids[v], ids[e.to], e.weight});
        if (p.accepting(v))
            accepting.push_back(ids[v]);
    }
    out["labels"] = labels;
    out["transitions"] = transitions;
    out["initial"] = ids[p.initial()];
    out["accepting"] = accepting;
    return out;
}

inline nlohmann::json buchi_to_json(const BuchiAutomaton& ba)
{
    nlohmann::json out;
    out["atoms"] = ba.atoms;
    out["initial"] = ba.initial;
    std::vector<std::uint32_t> accepting;
    nlohmann::json edges = nlohmann::json::array();
    for (std::uint32_t q = 0; q < ba.size(); ++q) {
        if (ba.accepting[q])
            accepting.push_back(q);
        for (const auto& e : ba.edges[q])
            edges.push_back({q, e.to, ba.guard_string(e.guard)});
    }
    out["states"] = ba.size();
    out["accepting"] = accepting;
    out["transitions"] = edges;
    return out;
}

} // namespace appc
