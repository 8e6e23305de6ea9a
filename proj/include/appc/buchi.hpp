#pragma once

#include "appc/error.hpp"
#include "appc/graph.hpp"
#include "appc/ltl.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace appc {

/// Conjunction of required and forbidden atoms (bit i is atom i).
struct Guard
{
    std::uint64_t required = 0;
    std::uint64_t forbidden = 0;

    [[nodiscard]] bool admits(std::uint64_t letter) const
    {
        return (letter & required) == required && (letter & forbidden) == 0;
    }
    /// Every letter admitted by `other` is admitted by this guard.
    [[nodiscard]] bool weaker_than(const Guard& other) const
    {
        return (required & ~other.required) == 0 && (forbidden & ~other.forbidden) == 0;
    }

    friend bool operator==(const Guard&, const Guard&) = default;
    friend auto operator<=>(const Guard&, const Guard&) = default;
};

struct BuchiEdge
{
    std::uint32_t to;
    Guard guard;

    friend bool operator==(const BuchiEdge&, const BuchiEdge&) = default;
    friend auto operator<=>(const BuchiEdge&, const BuchiEdge&) = default;
};

/// Nondeterministic Büchi automaton over 2^atoms with guarded transitions.
/// Complete: every state has an enabled transition for every letter.
struct BuchiAutomaton
{
    std::vector<std::string> atoms;
    std::vector<std::vector<BuchiEdge>> edges;
    std::vector<bool> accepting;
    std::uint32_t initial = 0;

    [[nodiscard]] std::size_t size() const { return edges.size(); }

    [[nodiscard]] std::size_t transition_count() const
    {
        std::size_t n = 0;
        for (const auto& out : edges)
            n += out.size();
        return n;
    }

    [[nodiscard]] std::size_t accepting_count() const
    {
        return static_cast<std::size_t>(std::count(accepting.begin(), accepting.end(), true));
    }

    /// Letter of a proposition set; propositions outside `atoms` are ignored.
    [[nodiscard]] std::uint64_t letter(const std::set<std::string>& props) const
    {
        std::uint64_t mask = 0;
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (props.contains(atoms[i]))
                mask |= std::uint64_t{1} << i;
        return mask;
    }

    [[nodiscard]] std::string guard_string(const Guard& g) const
    {
        std::string out;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            std::uint64_t bit = std::uint64_t{1} << i;
            if (g.required & bit)
                out += (out.empty() ? "" : " & ") + atoms[i];
            if (g.forbidden & bit)
                out += (out.empty() ? "!" : " & !") + atoms[i];
        }
        return out.empty() ? "true" : out;
    }
};

namespace detail {

/// Interned NNF sub-formulas.
class Closure
{
public:
    struct Entry
    {
        ltl::Op op;
        int atom = -1;
        int lhs = -1;
        int rhs = -1;
    };

    Closure(const ltl::Formula& nnf, std::vector<std::string> atoms) : atoms_(std::move(atoms)) { root_ = intern(nnf); }

    [[nodiscard]] int root() const { return root_; }
    [[nodiscard]] const Entry& at(int id) const { return entries_[static_cast<std::size_t>(id)]; }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

private:
    int intern(const ltl::Formula& f)
    {
        Entry e{f->op};
        if (f->op == ltl::Op::Atom) {
            e.atom = atom_index(f->atom);
        } else if (f->op == ltl::Op::Not) {
            // NNF: negation only on atoms.
            e.atom = atom_index(f->lhs->atom);
        } else {
            if (f->lhs)
                e.lhs = intern(f->lhs);
            if (f->rhs)
                e.rhs = intern(f->rhs);
        }
        auto key = std::make_tuple(static_cast<int>(e.op), e.atom, e.lhs, e.rhs);
        if (auto it = keys_.find(key); it != keys_.end())
            return it->second;
        int id = static_cast<int>(entries_.size());
        entries_.push_back(e);
        keys_.emplace(key, id);
        return id;
    }

    int atom_index(const std::string& name) const
    {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), name);
        return static_cast<int>(it - atoms_.begin());
    }

    std::vector<std::string> atoms_;
    std::vector<Entry> entries_;
    std::map<std::tuple<int, int, int, int>, int> keys_;
    int root_ = -1;
};

struct TableauNode
{
    std::set<int> incoming;
    std::set<int> fresh;
    std::set<int> old;
    std::set<int> next;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
};

/// Generalized Büchi automaton from the on-the-fly tableau expansion.
/// State 0 is the initial pseudo-node; accepting sets are per Until.
struct GeneralizedBuchi
{
    std::vector<Guard> guard_into;            // guard on every edge entering the node
    std::vector<std::vector<std::uint32_t>> succ;
    std::vector<std::vector<bool>> acceptance; // acceptance[k][node]
};

inline GeneralizedBuchi tableau(const Closure& cl)
{
    using ltl::Op;
    std::vector<TableauNode> done;          // index + 1 is the node id
    std::vector<TableauNode> work;
    work.push_back(TableauNode{{0}, {cl.root()}, {}, {}});

    while (!work.empty()) {
        TableauNode n = std::move(work.back());
        work.pop_back();
        if (n.fresh.empty()) {
            auto same = std::find_if(done.begin(), done.end(),
                                     [&](const TableauNode& d) { return d.old == n.old && d.next == n.next; });
            if (same != done.end()) {
                same->incoming.insert(n.incoming.begin(), n.incoming.end());
                continue;
            }
            int id = static_cast<int>(done.size()) + 1;
            TableauNode succ{{id}, n.next, {}, {}};
            done.push_back(std::move(n));
            work.push_back(std::move(succ));
            continue;
        }
        int eta = *n.fresh.begin();
        n.fresh.erase(n.fresh.begin());
        if (n.old.contains(eta)) {
            work.push_back(std::move(n));
            continue;
        }
        const auto& e = cl.at(eta);
        auto add_fresh = [](TableauNode& node, int f) {
            if (!node.old.contains(f))
                node.fresh.insert(f);
        };
        switch (e.op) {
        case Op::False: break;
        case Op::True:
            n.old.insert(eta);
            work.push_back(std::move(n));
            break;
        case Op::Atom:
        case Op::Not: {
            std::uint64_t bit = std::uint64_t{1} << e.atom;
            if (e.op == Op::Atom ? (n.neg & bit) : (n.pos & bit))
                break;
            (e.op == Op::Atom ? n.pos : n.neg) |= bit;
            n.old.insert(eta);
            work.push_back(std::move(n));
            break;
        }
        case Op::And:
            add_fresh(n, e.lhs);
            add_fresh(n, e.rhs);
            n.old.insert(eta);
            work.push_back(std::move(n));
            break;
        case Op::Next:
            n.next.insert(e.lhs);
            n.old.insert(eta);
            work.push_back(std::move(n));
            break;
        case Op::Or:
        case Op::Until:
        case Op::Release: {
            TableauNode a = n, b = std::move(n);
            a.old.insert(eta);
            b.old.insert(eta);
            if (e.op == Op::Or) {
                add_fresh(a, e.lhs);
                add_fresh(b, e.rhs);
            } else if (e.op == Op::Until) {
                add_fresh(a, e.lhs);
                a.next.insert(eta);
                add_fresh(b, e.rhs);
            } else {
                add_fresh(a, e.rhs);
                a.next.insert(eta);
                add_fresh(b, e.lhs);
                add_fresh(b, e.rhs);
            }
            // Pushed so that `a` is expanded first.
            work.push_back(std::move(b));
            work.push_back(std::move(a));
            break;
        }
        default: throw std::logic_error("formula is not in negation normal form");
        }
    }

    GeneralizedBuchi g;
    const std::size_t n = done.size() + 1;
    g.guard_into.assign(n, Guard{});
    g.succ.assign(n, {});
    for (std::size_t i = 0; i < done.size(); ++i) {
        const auto id = static_cast<std::uint32_t>(i + 1);
        g.guard_into[id] = Guard{done[i].pos, done[i].neg};
        for (int from : done[i].incoming)
            g.succ[static_cast<std::size_t>(from)].push_back(id);
    }
    for (auto& s : g.succ)
        std::sort(s.begin(), s.end());

    for (std::size_t f = 0; f < cl.size(); ++f) {
        const auto& e = cl.at(static_cast<int>(f));
        if (e.op != Op::Until)
            continue;
        std::vector<bool> member(n, false);
        for (std::size_t i = 0; i < done.size(); ++i)
            member[i + 1] = !done[i].old.contains(static_cast<int>(f)) || done[i].old.contains(e.rhs);
        if (std::all_of(member.begin() + 1, member.end(), [](bool b) { return b; }))
            continue;
        g.acceptance.push_back(std::move(member));
    }
    return g;
}

/// Counter-based degeneralization: the counter passes set k when leaving a
/// node of set k; states about to wrap around are accepting.
inline BuchiAutomaton degeneralize(const GeneralizedBuchi& g, std::vector<std::string> atoms)
{
    const std::size_t k = g.acceptance.size();
    std::map<std::pair<std::uint32_t, std::size_t>, std::uint32_t> index;
    std::vector<std::pair<std::uint32_t, std::size_t>> states;
    auto lookup = [&](std::uint32_t node, std::size_t counter) {
        auto [it, inserted] = index.try_emplace({node, counter}, static_cast<std::uint32_t>(states.size()));
        if (inserted)
            states.emplace_back(node, counter);
        return it->second;
    };

    BuchiAutomaton ba;
    ba.atoms = std::move(atoms);
    lookup(0, 0);
    for (std::size_t i = 0; i < states.size(); ++i) {
        auto [node, counter] = states[i];
        std::size_t next_counter = counter;
        bool accepting = k == 0;
        if (k > 0 && node != 0) {
            while (next_counter < k && g.acceptance[next_counter][node])
                ++next_counter;
            if (next_counter == k) {
                accepting = true;
                next_counter = 0;
            }
        }
        std::vector<BuchiEdge> out;
        for (std::uint32_t succ : g.succ[node])
            out.push_back(BuchiEdge{lookup(succ, next_counter), g.guard_into[succ]});
        ba.edges.push_back(std::move(out));
        ba.accepting.push_back(accepting);
    }
    ba.initial = 0;
    return ba;
}

/// Keeps states that can reach an accepting cycle; renumbers by BFS from
/// the initial state. An empty language yields a single rejecting state.
inline BuchiAutomaton prune_useless(const BuchiAutomaton& ba)
{
    AdjacencyGraph graph(ba.size());
    for (std::uint32_t q = 0; q < ba.size(); ++q)
        for (const auto& e : ba.edges[q])
            graph.add_edge(q, e.to, 1);
    auto scc = tarjan_scc(graph);
    std::vector<StateIndex> good;
    for (std::size_t c = 0; c < scc.members.size(); ++c) {
        if (!scc.nontrivial[c])
            continue;
        bool acc = std::any_of(scc.members[c].begin(), scc.members[c].end(),
                               [&](StateIndex q) { return ba.accepting[q]; });
        if (acc)
            good.insert(good.end(), scc.members[c].begin(), scc.members[c].end());
    }
    auto useful = can_reach(graph, good);

    BuchiAutomaton out;
    out.atoms = ba.atoms;
    if (good.empty() || !useful[ba.initial]) {
        out.edges.assign(1, {BuchiEdge{0, Guard{}}});
        out.accepting.assign(1, false);
        return out;
    }
    std::vector<std::int64_t> renumber(ba.size(), -1);
    std::vector<std::uint32_t> order{ba.initial};
    renumber[ba.initial] = 0;
    for (std::size_t i = 0; i < order.size(); ++i)
        for (const auto& e : ba.edges[order[i]])
            if (useful[e.to] && renumber[e.to] < 0) {
                renumber[e.to] = static_cast<std::int64_t>(order.size());
                order.push_back(e.to);
            }
    for (std::uint32_t q : order) {
        std::vector<BuchiEdge> edges;
        for (const auto& e : ba.edges[q])
            if (useful[e.to])
                edges.push_back(BuchiEdge{static_cast<std::uint32_t>(renumber[e.to]), e.guard});
        out.edges.push_back(std::move(edges));
        out.accepting.push_back(ba.accepting[q]);
    }
    return out;
}

/// Drops duplicate edges and edges whose guard implies another edge's guard
/// toward the same target.
inline std::vector<BuchiEdge> simplify_edges(std::vector<BuchiEdge> edges)
{
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<BuchiEdge> out;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        bool redundant = false;
        for (std::size_t j = 0; j < edges.size() && !redundant; ++j)
            redundant = j != i && edges[j].to == edges[i].to && edges[j].guard.weaker_than(edges[i].guard) &&
                        (edges[j].guard != edges[i].guard || j < i);
        if (!redundant)
            out.push_back(edges[i]);
    }
    return out;
}

/// Quotient by the coarsest partition that agrees on acceptance and on the
/// (guard, target class) successor signature; language-preserving.
inline BuchiAutomaton merge_bisimilar(const BuchiAutomaton& ba)
{
    const std::size_t n = ba.size();
    std::vector<std::uint32_t> cls(n);
    for (std::size_t q = 0; q < n; ++q)
        cls[q] = ba.accepting[q] ? 1 : 0;
    std::size_t classes = 0;
    for (;;) {
        using Signature = std::pair<std::uint32_t, std::vector<std::pair<Guard, std::uint32_t>>>;
        std::map<Signature, std::uint32_t> ids;
        std::vector<std::uint32_t> next(n);
        for (std::size_t q = 0; q < n; ++q) {
            Signature sig{cls[q], {}};
            for (const auto& e : ba.edges[q])
                sig.second.emplace_back(e.guard, cls[e.to]);
            std::sort(sig.second.begin(), sig.second.end());
            sig.second.erase(std::unique(sig.second.begin(), sig.second.end()), sig.second.end());
            auto [it, _] = ids.try_emplace(std::move(sig), static_cast<std::uint32_t>(ids.size()));
            next[q] = it->second;
        }
        cls = std::move(next);
        if (ids.size() == classes)
            break;
        classes = ids.size();
    }

    // Renumber classes in BFS order from the initial state.
    std::vector<std::int64_t> renumber(classes, -1);
    std::vector<std::uint32_t> rep;
    std::vector<std::uint32_t> queue{ba.initial};
    renumber[cls[ba.initial]] = 0;
    rep.push_back(ba.initial);
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (const auto& e : ba.edges[queue[i]])
            if (renumber[cls[e.to]] < 0) {
                renumber[cls[e.to]] = static_cast<std::int64_t>(rep.size());
                rep.push_back(e.to);
                queue.push_back(e.to);
            }

    BuchiAutomaton out;
    out.atoms = ba.atoms;
    for (std::uint32_t q : rep) {
        std::vector<BuchiEdge> edges;
        for (const auto& e : ba.edges[q])
            edges.push_back(BuchiEdge{static_cast<std::uint32_t>(renumber[cls[e.to]]), e.guard});
        out.edges.push_back(simplify_edges(std::move(edges)));
        out.accepting.push_back(ba.accepting[q]);
    }
    return out;
}

/// Adds a rejecting sink reached on every letter a state does not cover.
inline BuchiAutomaton complete(BuchiAutomaton ba)
{
    const std::size_t k = ba.atoms.size();
    const auto sink = static_cast<std::uint32_t>(ba.size());
    bool sink_used = false;
    for (std::uint32_t q = 0; q < ba.size(); ++q) {
        bool covered = true;
        if (k <= 16) {
            for (std::uint64_t letter = 0; letter < (std::uint64_t{1} << k) && covered; ++letter)
                covered = std::any_of(ba.edges[q].begin(), ba.edges[q].end(),
                                      [&](const BuchiEdge& e) { return e.guard.admits(letter); });
        } else {
            covered = std::any_of(ba.edges[q].begin(), ba.edges[q].end(),
                                  [](const BuchiEdge& e) { return e.guard == Guard{}; });
        }
        if (!covered) {
            ba.edges[q].push_back(BuchiEdge{sink, Guard{}});
            sink_used = true;
        }
    }
    if (sink_used) {
        ba.edges.push_back({BuchiEdge{sink, Guard{}}});
        ba.accepting.push_back(false);
    }
    return ba;
}

} // namespace detail

/// LTL to Büchi: negation normal form, tableau expansion to a generalized
/// automaton, degeneralization, removal of states that cannot reach an
/// accepting cycle, bisimulation quotient, and completion with a sink.
inline BuchiAutomaton to_buchi(const ltl::Formula& formula)
{
    auto atom_set = ltl::atoms(formula);
    std::vector<std::string> atoms(atom_set.begin(), atom_set.end());
    if (atoms.size() > 64)
        throw ValidationError("formulas with more than 64 atoms are not supported");
    auto nnf = ltl::to_nnf(formula);
    detail::Closure closure(nnf, atoms);
    auto generalized = detail::tableau(closure);
    auto ba = detail::degeneralize(generalized, atoms);
    ba = detail::prune_useless(ba);
    ba = detail::merge_bisimilar(ba);
    return detail::complete(std::move(ba));
}

/// Whether some run of `ba` over prefix . cycle^omega visits an accepting
/// state infinitely often. Letters are atom bit masks.
inline bool lasso_accepts(const BuchiAutomaton& ba, std::span<const std::uint64_t> prefix,
                          std::span<const std::uint64_t> cycle)
{
    if (cycle.empty())
        throw std::invalid_argument("lasso cycle must be non-empty");
    const std::size_t len = prefix.size() + cycle.size();
    auto letter = [&](std::size_t i) { return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()]; };
    auto succ_pos = [&](std::size_t i) { return i + 1 < len ? i + 1 : prefix.size(); };
    auto node = [&](std::uint32_t q, std::size_t i) { return static_cast<StateIndex>(q * len + i); };

    AdjacencyGraph graph(ba.size() * len);
    for (std::uint32_t q = 0; q < ba.size(); ++q)
        for (std::size_t i = 0; i < len; ++i)
            for (const auto& e : ba.edges[q])
                if (e.guard.admits(letter(i)))
                    graph.add_edge(node(q, i), node(e.to, succ_pos(i)), 1);

    std::vector<bool> reached(graph.size(), false);
    std::vector<StateIndex> stack{node(ba.initial, 0)};
    reached[stack.back()] = true;
    while (!stack.empty()) {
        StateIndex v = stack.back();
        stack.pop_back();
        for (const Edge& e : graph.successors(v))
            if (!reached[e.to]) {
                reached[e.to] = true;
                stack.push_back(e.to);
            }
    }
    auto scc = tarjan_scc(graph);
    for (std::size_t c = 0; c < scc.members.size(); ++c) {
        if (!scc.nontrivial[c] || !reached[scc.members[c].front()])
            continue;
        for (StateIndex v : scc.members[c])
            if (ba.accepting[v / len])
                return true;
    }
    return false;
}

inline bool lasso_accepts(const BuchiAutomaton& ba, const std::vector<std::set<std::string>>& prefix,
                          const std::vector<std::set<std::string>>& cycle)
{
    std::vector<std::uint64_t> p, c;
    for (const auto& l : prefix)
        p.push_back(ba.letter(l));
    for (const auto& l : cycle)
        c.push_back(ba.letter(l));
    return lasso_accepts(ba, p, c);
}

} // namespace appc
