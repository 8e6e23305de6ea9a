#pragma once

#include "appc/error.hpp"
#include "appc/offline.hpp"
#include "appc/penalty.hpp"
#include "appc/synthesis.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace appc {

struct SimulationOptions
{
    std::size_t rounds = 20;
    std::uint64_t seed = 1;
    bool strict = false;
    JEstimateOptions j;
    bool record_trace = false;
    /// Guard against controllers that never finish a round.
    std::uint64_t max_steps = 10'000'000;
};

struct TraceRow
{
    std::uint64_t time;
    std::size_t round;
    Phase phase;
    StateIndex product_state;
    Level level;
    std::size_t cycles_done;
    std::size_t candidates;
};

struct SimulationResult
{
    std::vector<RoundStats> rounds;
    std::vector<StateIndex> run; // executed product run, starting at the initial state
    std::vector<TraceRow> trace;
    std::uint64_t total_level_sum = 0;
    std::size_t total_visits = 0;
    std::size_t accepting_visits = 0;
    std::uint64_t end_time = 0;
    std::vector<std::string> warnings;

    /// Penalty per surveillance cycle over the executed prefix; zero before
    /// the first cycle completes.
    [[nodiscard]] Rational cumulative_appc(unsigned rate) const
    {
        if (total_visits == 0)
            return Rational(0);
        return make_rational(static_cast<long>(total_level_sum), static_cast<long>(rate) * static_cast<long>(total_visits));
    }
};

/// Seeds of the two random streams of one simulation. Penalties depend only
/// on the seed and the elapsed time, so two controllers run with the same
/// seed face the same penalty field.
inline std::uint64_t penalty_stream_seed(std::uint64_t seed) { return mix_seed(seed); }
inline std::uint64_t estimator_stream_seed(std::uint64_t seed) { return mix_seed(seed + 0x6a09e667f3bcc909ULL); }

/// Runs `ctl` in closed loop with the penalty field for `opt.rounds` rounds.
/// Penalties advance every time unit; the level of a state is incurred at
/// the instant the agent arrives, and at t = 0 for the initial state.
template <class Controller>
SimulationResult simulate(const Synthesis& syn, const OfflinePlan& plan, Controller& ctl, const SimulationOptions& opt)
{
    const Product& p = syn.product;
    Rng penalty_rng(penalty_stream_seed(opt.seed));
    Rng j_rng(estimator_stream_seed(opt.seed));
    PenaltyState pen = init_penalties(syn.penalty, penalty_rng);
    RoundTracker tracker(syn, plan.in_target, opt.strict, [&](StateIndex start, const Rational& eps) {
        return estimate_j(syn, plan.cycle, syn.vstar(), eps, start, opt.j, j_rng);
    });

    SimulationResult out;
    StateIndex x = p.initial();
    std::uint64_t time = 0;
    out.run.push_back(x);
    auto record = [&](std::size_t round, Phase phase, Level level, std::size_t candidates) {
        if (opt.record_trace)
            out.trace.push_back(TraceRow{time, round, phase, x, level, tracker.cycles_done(), candidates});
    };

    if (opt.rounds > 0) {
        const Level level = pen.levels[p.ts_state(x)];
        tracker.start(x, level, time);
        record(tracker.round(), tracker.phase(), level, 0);
    }
    std::uint64_t steps = 0;
    while (tracker.completed().size() < opt.rounds) {
        if (++steps > opt.max_steps)
            throw Error("simulation exceeded " + std::to_string(opt.max_steps) + " steps after " +
                        std::to_string(tracker.completed().size()) + " rounds");
        const StateIndex y = ctl.choose(StepContext{x, time, pen, tracker});
        const auto w = transition_weight(p, x, y);
        if (!w)
            throw std::logic_error("controller chose a non-transition " + p.id(x) + " -> " + p.id(y));
        for (Weight t = 0; t < *w; ++t)
            step_penalties(syn.penalty, pen, penalty_rng);
        time += *w;
        x = y;
        out.run.push_back(x);
        const std::size_t round = tracker.round();
        const Phase phase = tracker.phase();
        const Level level = pen.levels[p.ts_state(x)];
        const auto ev = tracker.arrive(x, level, time);
        ctl.on_arrive(x, ev);
        // a completing arrival is logged with the round and phase it closes
        record(round, ev.round_completed ? phase : tracker.phase(), level, ctl.candidates_evaluated());
    }

    out.rounds = tracker.completed();
    out.total_level_sum = tracker.total_level_sum();
    out.total_visits = tracker.total_visits();
    out.accepting_visits = tracker.accepting_visits();
    out.end_time = time;
    out.warnings = tracker.warnings();
    return out;
}

struct SatisfactionReport
{
    std::size_t accepting_visits = 0;
    std::size_t rounds = 0;
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Checks an executed product run against the guarantees of the synthesized
/// strategy: every completed round met an accepting state, no state visited
/// has lost the ability to reach the chosen accepting set, and every step is
/// a transition of the product (so the safety part of the formula holds on
/// the finite prefix).
inline SatisfactionReport verify_satisfaction(const Synthesis& syn, const OfflinePlan& plan,
                                              std::span<const StateIndex> run, std::size_t rounds_completed)
{
    const Product& p = syn.product;
    SatisfactionReport rep;
    rep.rounds = rounds_completed;
    if (run.empty()) {
        if (rounds_completed > 0)
            rep.violations.push_back("empty trace but " + std::to_string(rounds_completed) + " rounds completed");
        return rep;
    }
    if (run.front() != p.initial())
        rep.violations.push_back("trace does not start at the initial state");
    for (std::size_t i = 0; i < run.size(); ++i) {
        const StateIndex v = run[i];
        if (v >= p.size()) {
            rep.violations.push_back("step " + std::to_string(i) + ": state #" + std::to_string(v) +
                                     " is not in the product");
            continue;
        }
        if (p.accepting(v))
            ++rep.accepting_visits;
        if (!plan.mission.defined(v))
            rep.violations.push_back("step " + std::to_string(i) + ": " + p.id(v) +
                                     " cannot reach the accepting states");
        if (i > 0 && run[i - 1] < p.size() && !transition_weight(p, run[i - 1], v))
            rep.violations.push_back("step " + std::to_string(i) + ": " + p.id(run[i - 1]) + " -> " + p.id(v) +
                                     " is not a product transition");
    }
    if (rep.accepting_visits < rounds_completed)
        rep.violations.push_back("only " + std::to_string(rep.accepting_visits) + " accepting visits for " +
                                 std::to_string(rounds_completed) + " rounds");
    return rep;
}

inline void write_trace_csv(std::ostream& os, const Synthesis& syn, const SimulationResult& res,
                            bool with_candidates)
{
    const Product& p = syn.product;
    os << "time,round,phase,product_state,ts_state,penalty,cycles_done";
    if (with_candidates)
        os << ",candidates_evaluated";
    os << '\n';
    for (const auto& row : res.trace) {
        os << row.time << ',' << row.round << ',' << to_string(row.phase) << ',' << p.id(row.product_state) << ','
           << p.ts().id(p.ts_state(row.product_state)) << ',' << to_decimal(syn.penalty.level_value(row.level))
           << ',' << row.cycles_done;
        if (with_candidates)
            os << ',' << row.candidates;
        os << '\n';
    }
}

} // namespace appc
