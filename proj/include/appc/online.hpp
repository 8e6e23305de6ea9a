#pragma once

#include "appc/error.hpp"
#include "appc/offline.hpp"
#include "appc/penalty.hpp"
#include "appc/synthesis.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace appc {

/// I_X(x, y) = 1 iff w*(x, X) > w*(y, X).
class ShorteningIndicator
{
public:
    ShorteningIndicator(const Product& p, std::span<const StateIndex> targets) : dist_(distances_to(p, targets)) {}
    explicit ShorteningIndicator(std::vector<Distance> dist) : dist_(std::move(dist)) {}

    [[nodiscard]] bool operator()(StateIndex x, StateIndex y) const { return dist_[x] > dist_[y]; }
    [[nodiscard]] const std::vector<Distance>& distance() const { return dist_; }
    [[nodiscard]] bool is_target(StateIndex v) const { return dist_[v] == Distance{0}; }

private:
    std::vector<Distance> dist_;
};

/// Transitions already executed since the cycle anchor, the allowance
/// (cycle positions to the target plus two) and hop counts to the target.
struct LengthBudget
{
    std::size_t executed = 0;
    std::size_t budget = 0;
    const std::vector<Distance>* hops = nullptr;
};

struct RunQuery
{
    const ShorteningIndicator* indicator = nullptr;
    Weight weight_cap = 0;
    std::optional<LengthBudget> length;
};

namespace detail {

template <class Visitor>
void run_search(const Product& p, const RunQuery& q, std::vector<StateIndex>& path, Weight weight, bool shortening,
                Visitor& visit)
{
    const auto& dist = q.indicator->distance();
    const StateIndex v = path.back();
    const std::size_t len = path.size(); // transitions once a successor is appended
    for (const Edge& e : p.successors(v)) {
        const Distance dz = dist[e.to];
        if (!dz.reachable())
            continue;
        const Weight nw = weight + e.weight;
        if (nw + dz.value() > q.weight_cap)
            continue;
        const bool nshort = shortening && dist[v] > dz;
        bool within_length = false;
        if (q.length) {
            const Distance h = (*q.length->hops)[e.to];
            within_length = h.reachable() && q.length->executed + len + h.value() <= q.length->budget;
        }
        if (!nshort && !within_length)
            continue;
        path.push_back(e.to);
        visit.push(e.to, nw);
        if (dz == Distance{0})
            visit.accept(std::span<const StateIndex>(path), nw);
        run_search(p, q, path, nw, nshort, visit);
        visit.pop();
        path.pop_back();
    }
}

} // namespace detail

/// Depth-first enumeration, successors in ascending order, so runs arrive in
/// lexicographic order. A run is reported every time it reaches the target
/// set with all transitions shortening, or within the length budget when one
/// is given. Without a length budget, a start inside the target set yields
/// only the zero-length run. Every run weighs at most the cap, which may not
/// be below the start's distance to the target.
///
/// Visitor: push(state, weight so far), pop(), accept(path, weight).
template <class Visitor>
void for_each_run(const Product& p, StateIndex from, const RunQuery& q, Visitor&& visit)
{
    const auto& dist = q.indicator->distance();
    if (!dist[from].reachable())
        throw ValidationError("target is unreachable from " + p.id(from));
    if (q.weight_cap < dist[from].value())
        throw ValidationError("weight cap " + std::to_string(q.weight_cap) + " is below the minimum weight " +
                              std::to_string(dist[from].value()) + " to the target");
    std::vector<StateIndex> path{from};
    if (!q.length && dist[from] == Distance{0}) {
        visit.accept(std::span<const StateIndex>(path), 0);
        return;
    }
    detail::run_search(p, q, path, 0, true, visit);
}

namespace detail {

struct RunCollector
{
    std::vector<FiniteRun> runs;
    void push(StateIndex, Weight) {}
    void pop() {}
    void accept(std::span<const StateIndex> path, Weight) { runs.push_back(FiniteRun{{path.begin(), path.end()}}); }
};

} // namespace detail

/// Runs to the accepting states with every transition shortening.
inline std::vector<FiniteRun> enumerate_mission_runs(const Product& p, StateIndex from,
                                                     const ShorteningIndicator& ind, Weight weight_cap)
{
    detail::RunCollector c;
    for_each_run(p, from, RunQuery{&ind, weight_cap, std::nullopt}, c);
    return std::move(c.runs);
}

/// Before the cycle is reached: shortening runs into the cycle (indicator over
/// the cycle states). Once anchored: runs to the target that are shortening
/// or fit the length budget (indicator over the target alone).
inline std::vector<FiniteRun> enumerate_cycle_runs(const Product& p, StateIndex from, const ShorteningIndicator& ind,
                                                   Weight weight_cap, std::optional<LengthBudget> length = std::nullopt)
{
    detail::RunCollector c;
    for_each_run(p, from, RunQuery{&ind, weight_cap, length}, c);
    return std::move(c.runs);
}

struct OnlineConfig
{
    Weight visibility = 6;
    Weight horizon = 9;
    std::optional<Weight> weight_cap; // default 2 * horizon
    Weight segment_split_factor = 3;
    PenaltyBackend backend = PenaltyBackend::dp;
};

/// Read-only data shared by every online controller of one synthesis result.
class OnlinePlanner
{
public:
    struct Target
    {
        ShorteningIndicator indicator;
        std::vector<Distance> hops;
    };

    OnlinePlanner(const Synthesis& syn, const OfflinePlan& plan, OnlineConfig cfg)
        : syn_(syn), plan_(plan), cfg_(cfg), forecast_(syn.penalty, cfg.horizon, cfg.backend),
          mission_(plan.mission.distance()), approach_(plan.cycle.distance())
    {
        const auto d = min_weights(syn.product.ts());
        const std::size_t n = syn.product.ts().size();
        visible_.assign(n, std::vector<bool>(n, false));
        for (StateIndex s = 0; s < n; ++s)
            for (StateIndex t : visible_set(d, s, cfg.visibility))
                visible_[s][t] = true;
        for (StateIndex c : plan.cycle.cycle().states) {
            if (targets_.contains(c))
                continue;
            std::vector<StateIndex> one{c};
            targets_.emplace(c, Target{ShorteningIndicator(syn.product, one), hops_to(syn.product, one)});
        }
    }

    [[nodiscard]] const Synthesis& synthesis() const { return syn_; }
    [[nodiscard]] const OfflinePlan& plan() const { return plan_; }
    [[nodiscard]] const OnlineConfig& config() const { return cfg_; }
    [[nodiscard]] const PenaltyForecast& forecast() const { return forecast_; }
    [[nodiscard]] const ShorteningIndicator& mission_indicator() const { return mission_; }
    [[nodiscard]] const ShorteningIndicator& approach_indicator() const { return approach_; }
    [[nodiscard]] const Target& target(StateIndex c) const { return targets_.at(c); }
    [[nodiscard]] bool visible(StateIndex from_ts, StateIndex ts) const { return visible_[from_ts][ts]; }
    [[nodiscard]] Weight base_cap() const { return cfg_.weight_cap.value_or(2 * cfg_.horizon); }

    /// Simulated expected penalty of product state v reached `elapsed` time
    /// units from now, observed from TS state `from_ts`.
    [[nodiscard]] const Rational& penalty_forecast(StateIndex from_ts, StateIndex v, std::uint64_t elapsed,
                                                   const PenaltyState& observed) const
    {
        const StateIndex ts = syn_.product.ts_state(v);
        if (elapsed <= cfg_.horizon && visible_[from_ts][ts])
            return forecast_.visible(ts, observed.levels[ts], elapsed);
        return forecast_.expected(ts);
    }

private:
    const Synthesis& syn_;
    const OfflinePlan& plan_;
    OnlineConfig cfg_;
    PenaltyForecast forecast_;
    ShorteningIndicator mission_;
    ShorteningIndicator approach_;
    std::map<StateIndex, Target> targets_;
    std::vector<std::vector<bool>> visible_;
};

/// Expected penalty per surveillance cycle of the current round if `run`
/// (starting at the current state) were executed next.
inline Rational evaluate_f(const OnlinePlanner& planner, const RoundTracker& rounds, std::span<const StateIndex> run,
                           const PenaltyState& observed)
{
    const Synthesis& syn = planner.synthesis();
    const Product& p = syn.product;
    const StateIndex from_ts = p.ts_state(run.front());
    Rational num = make_rational(static_cast<long>(rounds.level_sum()), syn.penalty.rate());
    std::size_t visits = rounds.visits();
    Weight elapsed = 0;
    for (std::size_t j = 1; j < run.size(); ++j) {
        elapsed += *transition_weight(p, run[j - 1], run[j]);
        num += planner.penalty_forecast(from_ts, run[j], elapsed, observed);
        if (syn.surveillance[run[j]])
            ++visits;
    }
    if (!syn.surveillance[run.back()])
        ++visits;
    num /= static_cast<long>(visits);
    num.canonicalize();
    return num;
}

/// Receding-horizon controller: each step enumerates the candidate runs of
/// the current phase, picks the one minimizing evaluate_f (first in
/// lexicographic order on ties) and applies its first transition.
class OnlineController
{
public:
    explicit OnlineController(const OnlinePlanner& planner) : planner_(planner) {}

    StateIndex choose(const StepContext& ctx)
    {
        const Synthesis& syn = planner_.synthesis();
        const CycleStrategy& cycle = planner_.plan().cycle;
        const StateIndex x = ctx.current;
        Evaluator eval(planner_, ctx);

        if (ctx.rounds.phase() == Phase::mission) {
            anchor_.reset();
            const auto& ind = planner_.mission_indicator();
            Weight cap = std::max(planner_.base_cap(), ind.distance()[x].value());
            for_each_run(syn.product, x, RunQuery{&ind, cap, std::nullopt}, eval);
        } else {
            if (!anchor_)
                if (auto pos = cycle.locate(x, last_position_))
                    anchor_ = make_anchor(*pos);
            if (!anchor_) {
                const auto& ind = planner_.approach_indicator();
                Weight cap = std::max(planner_.base_cap(), ind.distance()[x].value());
                for_each_run(syn.product, x, RunQuery{&ind, cap, std::nullopt}, eval);
            } else {
                const auto& target = planner_.target(cycle.at(anchor_->target));
                Weight baseline = 0;
                if (anchor_->on_track)
                    baseline = cycle.segment_weight(anchor_->track, anchor_->offset - anchor_->executed);
                Weight cap = std::max({planner_.base_cap(), target.indicator.distance()[x].value(), baseline});
                LengthBudget budget{anchor_->executed, anchor_->offset + 2, &target.hops};
                for_each_run(syn.product, x, RunQuery{&target.indicator, cap, budget}, eval);
            }
        }
        candidates_ = eval.count;
        if (eval.best_run.size() < 2)
            throw std::logic_error("online controller found no candidate run from " + syn.product.id(x));
        return eval.best_run[1];
    }

    void on_arrive(StateIndex x, const RoundTracker::Arrival& ev)
    {
        const CycleStrategy& cycle = planner_.plan().cycle;
        if (anchor_) {
            ++anchor_->executed;
            if (anchor_->on_track && cycle.at(anchor_->track + 1) == x)
                anchor_->track = (anchor_->track + 1) % cycle.length();
            else
                anchor_->on_track = false;
            if (cycle.at(anchor_->target) == x) {
                last_position_ = anchor_->target;
                anchor_ = make_anchor(anchor_->target);
            }
        }
        if (ev.round_completed || ev.entered_average)
            anchor_.reset();
    }

    [[nodiscard]] std::size_t candidates_evaluated() const { return candidates_; }

private:
    struct Anchor
    {
        std::size_t position; // c_a
        std::size_t target;   // c_b (or an intermediate cycle position)
        std::size_t offset;   // cycle transitions from anchor to target
        std::size_t executed = 0;
        bool on_track = true;
        std::size_t track;
    };

    Anchor make_anchor(std::size_t pos) const
    {
        const CycleStrategy& cycle = planner_.plan().cycle;
        const std::size_t len = cycle.length();
        const auto& surv = planner_.synthesis().surveillance;
        std::size_t offset = 1;
        while (offset < len && !surv[cycle.at(pos + offset)])
            ++offset;
        const Weight segment = cycle.segment_weight(pos, offset);
        const auto& cfg = planner_.config();
        if (offset > 1 && segment > cfg.segment_split_factor * cfg.horizon) {
            std::size_t best = 1;
            Weight best_gap = UINT64_MAX;
            for (std::size_t o = 1; o < offset; ++o) {
                Weight twice = 2 * cycle.segment_weight(pos, o);
                Weight gap = twice > segment ? twice - segment : segment - twice;
                if (gap < best_gap) {
                    best_gap = gap;
                    best = o;
                }
            }
            offset = best;
        }
        return Anchor{pos % len, (pos + offset) % len, offset, 0, true, pos % len};
    }

    struct Evaluator
    {
        Evaluator(const OnlinePlanner& planner, const StepContext& ctx)
            : planner(planner), ctx(ctx), syn(planner.synthesis()),
              from_ts(syn.product.ts_state(ctx.current))
        {
            num.push_back(make_rational(static_cast<long>(ctx.rounds.level_sum()), syn.penalty.rate()));
            visits.push_back(ctx.rounds.visits());
        }

        void push(StateIndex v, Weight elapsed)
        {
            num.push_back(num.back() + planner.penalty_forecast(from_ts, v, elapsed, ctx.penalties));
            visits.push_back(visits.back() + (syn.surveillance[v] ? 1 : 0));
        }
        void pop()
        {
            num.pop_back();
            visits.pop_back();
        }
        void accept(std::span<const StateIndex> path, Weight)
        {
            ++count;
            const std::size_t cycles = visits.back() + (syn.surveillance[path.back()] ? 0 : 1);
            // f = num / cycles; compare without dividing
            if (best_run.empty() || num.back() * static_cast<long>(best_cycles) < best_num * static_cast<long>(cycles)) {
                best_run.assign(path.begin(), path.end());
                best_num = num.back();
                best_cycles = cycles;
            }
        }

        const OnlinePlanner& planner;
        const StepContext& ctx;
        const Synthesis& syn;
        StateIndex from_ts;
        std::vector<Rational> num;
        std::vector<std::size_t> visits;
        std::vector<StateIndex> best_run;
        Rational best_num;
        std::size_t best_cycles = 1;
        std::size_t count = 0;
    };

    const OnlinePlanner& planner_;
    std::optional<Anchor> anchor_;
    std::optional<std::size_t> last_position_;
    std::size_t candidates_ = 0;
};

} // namespace appc
