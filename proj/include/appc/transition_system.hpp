#pragma once

#include "appc/error.hpp"
#include "appc/graph.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace appc {

/// Default name of the surveillance proposition.
inline constexpr const char* default_surveillance_prop = "pi_sur";

/// Unvalidated description of a transition system, keyed by string ids.
struct TransitionSystemSpec
{
    std::vector<std::string> states;
    std::vector<std::string> ap;
    std::map<std::string, std::set<std::string>> labels;
    std::vector<std::tuple<std::string, std::string, long long>> transitions;
    std::string initial;
};

/// Weighted deterministic transition system with an initial state. States are
/// indexed in lexicographic order of their ids, so index order is id order.
class TransitionSystem
{
public:
    /// Validates `spec`; throws ValidationError naming the first violated
    /// invariant.
    static TransitionSystem create(const TransitionSystemSpec& spec)
    {
        TransitionSystem ts;
        if (spec.states.empty())
            throw ValidationError("transition system has no states");
        ts.ids_ = spec.states;
        std::sort(ts.ids_.begin(), ts.ids_.end());
        if (auto dup = std::adjacent_find(ts.ids_.begin(), ts.ids_.end()); dup != ts.ids_.end())
            throw ValidationError("duplicate state id '" + *dup + "'");
        for (const auto& id : ts.ids_)
            if (id.empty())
                throw ValidationError("empty state id");

        ts.ap_ = spec.ap;
        std::sort(ts.ap_.begin(), ts.ap_.end());
        if (auto dup = std::adjacent_find(ts.ap_.begin(), ts.ap_.end()); dup != ts.ap_.end())
            throw ValidationError("duplicate proposition '" + *dup + "'");

        const std::size_t n = ts.ids_.size();
        ts.labels_.assign(n, {});
        for (const auto& [state, props] : spec.labels) {
            auto s = ts.index_of(state);
            if (!s)
                throw ValidationError("label for unknown state '" + state + "'");
            for (const auto& prop : props) {
                if (!std::binary_search(ts.ap_.begin(), ts.ap_.end(), prop))
                    throw ValidationError("state " + state + " labeled with undeclared proposition '" + prop +
                                          "'");
                ts.labels_[*s].insert(prop);
            }
        }

        ts.succ_.assign(n, {});
        for (const auto& [src, dst, weight] : spec.transitions) {
            auto s = ts.index_of(src);
            auto d = ts.index_of(dst);
            if (!s)
                throw ValidationError("transition from unknown state '" + src + "'");
            if (!d)
                throw ValidationError("transition to unknown state '" + dst + "'");
            if (weight < 1)
                throw ValidationError("transition " + src + " -> " + dst + " has weight " +
                                      std::to_string(weight) + "; weights must be positive integers");
            ts.succ_[*s].push_back(Edge{*d, static_cast<Weight>(weight)});
        }
        for (StateIndex s = 0; s < n; ++s) {
            auto& out = ts.succ_[s];
            std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return a.to < b.to; });
            for (std::size_t k = 1; k < out.size(); ++k)
                if (out[k].to == out[k - 1].to)
                    throw ValidationError("duplicate transition " + ts.ids_[s] + " -> " + ts.ids_[out[k].to]);
            if (out.empty())
                throw ValidationError("state " + ts.ids_[s] + " has no successor");
        }

        auto init = ts.index_of(spec.initial);
        if (!init)
            throw ValidationError("initial state '" + spec.initial + "' is not a state");
        ts.initial_ = *init;
        return ts;
    }

    [[nodiscard]] std::size_t size() const { return ids_.size(); }
    [[nodiscard]] std::span<const Edge> successors(StateIndex s) const { return succ_[s]; }
    [[nodiscard]] StateIndex initial() const { return initial_; }
    [[nodiscard]] const std::string& id(StateIndex s) const { return ids_[s]; }
    [[nodiscard]] const std::vector<std::string>& ids() const { return ids_; }
    [[nodiscard]] const std::vector<std::string>& ap() const { return ap_; }
    [[nodiscard]] const std::set<std::string>& labels(StateIndex s) const { return labels_[s]; }
    [[nodiscard]] bool has_label(StateIndex s, const std::string& prop) const { return labels_[s].contains(prop); }

    [[nodiscard]] std::optional<StateIndex> index_of(const std::string& id) const
    {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id)
            return std::nullopt;
        return static_cast<StateIndex>(it - ids_.begin());
    }

    [[nodiscard]] std::optional<Weight> weight(StateIndex from, StateIndex to) const
    {
        const auto& out = succ_[from];
        auto it = std::lower_bound(out.begin(), out.end(), to, [](const Edge& e, StateIndex t) { return e.to < t; });
        if (it == out.end() || it->to != to)
            return std::nullopt;
        return it->weight;
    }

    [[nodiscard]] std::size_t transition_count() const
    {
        std::size_t total = 0;
        for (const auto& out : succ_)
            total += out.size();
        return total;
    }

    /// Round-trips through the unvalidated description.
    [[nodiscard]] TransitionSystemSpec to_spec() const
    {
        TransitionSystemSpec spec;
        spec.states = ids_;
        spec.ap = ap_;
        for (StateIndex s = 0; s < size(); ++s) {
            if (!labels_[s].empty())
                spec.labels[ids_[s]] = labels_[s];
            for (const Edge& e : succ_[s])
                spec.transitions.emplace_back(ids_[s], ids_[e.to], static_cast<long long>(e.weight));
        }
        spec.initial = ids_[initial_];
        return spec;
    }

private:
    TransitionSystem() = default;

    std::vector<std::string> ids_;
    std::vector<std::string> ap_;
    std::vector<std::set<std::string>> labels_;
    std::vector<std::vector<Edge>> succ_;
    StateIndex initial_ = 0;
};

/// A non-empty finite sequence of states; validity is relative to a graph.
struct FiniteRun
{
    std::vector<StateIndex> states;

    [[nodiscard]] std::size_t length() const { return states.size(); }
    [[nodiscard]] StateIndex last() const { return states.back(); }

    friend bool operator==(const FiniteRun&, const FiniteRun&) = default;
    friend auto operator<=>(const FiniteRun&, const FiniteRun&) = default;
};

template <WeightedDigraph G>
std::optional<Weight> transition_weight(const G& g, StateIndex from, StateIndex to)
{
    for (const Edge& e : g.successors(from))
        if (e.to == to)
            return e.weight;
    return std::nullopt;
}

/// Sum of transition weights along `run`; 0 for a single state. Throws
/// ValidationError if a consecutive pair is not a transition.
template <WeightedDigraph G>
Weight run_weight(const G& g, const FiniteRun& run)
{
    if (run.states.empty())
        throw ValidationError("empty run");
    Weight total = 0;
    for (std::size_t i = 0; i + 1 < run.states.size(); ++i) {
        auto w = transition_weight(g, run.states[i], run.states[i + 1]);
        if (!w)
            throw ValidationError("run step " + std::to_string(i) + " is not a transition");
        total += *w;
    }
    return total;
}

template <WeightedDigraph G>
bool is_valid_run(const G& g, const FiniteRun& run)
{
    if (run.states.empty())
        return false;
    for (StateIndex s : run.states)
        if (s >= g.size())
            return false;
    for (std::size_t i = 0; i + 1 < run.states.size(); ++i)
        if (!transition_weight(g, run.states[i], run.states[i + 1]))
            return false;
    return true;
}

using DistanceMatrix = std::vector<std::vector<Distance>>;

inline DistanceMatrix min_weights(const TransitionSystem& ts) { return all_pairs_min_weights(ts); }

/// w*(s, S') = min over the set.
inline Distance min_weight_to_set(const DistanceMatrix& d, StateIndex from, std::span<const StateIndex> set)
{
    Distance best = Distance::unreachable();
    for (StateIndex t : set)
        best = std::min(best, d[from][t]);
    return best;
}

/// States within weighted distance `range` of `from`, ascending.
inline std::vector<StateIndex> visible_set(const DistanceMatrix& d, StateIndex from, Weight range)
{
    std::vector<StateIndex> out;
    for (StateIndex t = 0; t < d[from].size(); ++t)
        if (d[from][t] <= Distance{range})
            out.push_back(t);
    return out;
}

/// The surveillance proposition and its state set S_sur.
class SurveillanceSpec
{
public:
    SurveillanceSpec(const TransitionSystem& ts, std::string prop) : prop_(std::move(prop)), member_(ts.size(), false)
    {
        for (StateIndex s = 0; s < ts.size(); ++s)
            member_[s] = ts.has_label(s, prop_);
    }

    [[nodiscard]] const std::string& prop() const { return prop_; }
    [[nodiscard]] bool contains(StateIndex s) const { return member_[s]; }
    [[nodiscard]] bool empty() const { return std::none_of(member_.begin(), member_.end(), [](bool b) { return b; }); }
    [[nodiscard]] const std::vector<bool>& members() const { return member_; }

private:
    std::string prop_;
    std::vector<bool> member_;
};

/// Number of complete surveillance cycles in `run`: visits to S_sur after
/// position 0, plus one when the run does not end in S_sur.
inline std::size_t count_surveillance_cycles(const std::vector<bool>& surveillance, const FiniteRun& run)
{
    std::size_t visits = 0;
    for (std::size_t i = 1; i < run.states.size(); ++i)
        if (surveillance[run.states[i]])
            ++visits;
    return surveillance[run.last()] ? visits : visits + 1;
}

inline std::size_t count_surveillance_cycles(const SurveillanceSpec& spec, const FiniteRun& run)
{
    return count_surveillance_cycles(spec.members(), run);
}

/// Copy of `ts` with `prop` added to every label (and to the AP), so that
/// APPC becomes the expected average penalty per stage.
inline TransitionSystem universal_surveillance(const TransitionSystem& ts,
                                               const std::string& prop = default_surveillance_prop)
{
    TransitionSystemSpec spec = ts.to_spec();
    if (std::find(spec.ap.begin(), spec.ap.end(), prop) == spec.ap.end())
        spec.ap.push_back(prop);
    for (const auto& id : spec.states)
        spec.labels[id].insert(prop);
    return TransitionSystem::create(spec);
}

} // namespace appc
