#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace appc;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

Synthesis synth(const TransitionSystem& ts, const PenaltyField& field, const char* formula)
{
    return synthesize(ts, field, ltl::parse(formula));
}

/// Exact probability that the cycle strategy from `start`, over `cycles`
/// surveillance cycles, keeps its per-cycle penalty within `bound`. States'
/// penalty chains are independent and the visit times are fixed, so the sum
/// distribution is a convolution of per-state distributions, each computed
/// over the chain's full level history.
Rational exact_success(const Synthesis& syn, const CycleStrategy& cs, StateIndex start, std::size_t cycles,
                       const Rational& bound)
{
    const Product& p = syn.product;
    const unsigned r = syn.penalty.rate();
    std::map<StateIndex, std::vector<std::uint64_t>> visits;
    StateIndex x = start;
    std::optional<std::size_t> pos;
    std::uint64_t time = 0;
    for (std::size_t done = 0; done < cycles;) {
        StateIndex y = cs.next(x, pos);
        time += *transition_weight(p, x, y);
        x = y;
        visits[p.ts_state(x)].push_back(time);
        done += syn.surveillance[x];
    }
    std::vector<Rational> total{1}; // distribution of the summed levels
    for (const auto& [s, times] : visits) {
        const Rational& ps = syn.penalty.prob(s);
        // (level, partial sum) -> probability
        std::map<std::pair<unsigned, unsigned>, Rational> cur;
        for (unsigned l = 0; l <= r; ++l)
            cur[{l, 0}] = q(1, r + 1);
        std::uint64_t now = 0;
        for (std::uint64_t t : times) {
            for (; now < t; ++now) {
                std::map<std::pair<unsigned, unsigned>, Rational> next;
                for (const auto& [key, pr] : cur) {
                    auto [l, sum] = key;
                    if (l < r) {
                        next[{l + 1, sum}] += pr;
                    } else {
                        next[{r, sum}] += pr * ps;
                        next[{0, sum}] += pr * (1 - ps);
                    }
                }
                cur = std::move(next);
            }
            std::map<std::pair<unsigned, unsigned>, Rational> seen;
            for (const auto& [key, pr] : cur)
                seen[{key.first, key.second + key.first}] += pr;
            cur = std::move(seen);
        }
        std::vector<Rational> mine;
        for (const auto& [key, pr] : cur) {
            if (mine.size() <= key.second)
                mine.resize(key.second + 1, Rational(0));
            mine[key.second] += pr;
        }
        std::vector<Rational> conv(total.size() + mine.size() - 1, Rational(0));
        for (std::size_t i = 0; i < total.size(); ++i)
            for (std::size_t j = 0; j < mine.size(); ++j)
                conv[i + j] += total[i] * mine[j];
        total = std::move(conv);
    }
    const Rational limit = bound * static_cast<long>(cycles) * static_cast<long>(r);
    Rational out = 0;
    for (std::size_t k = 0; k < total.size(); ++k)
        if (Rational(static_cast<long>(k)) <= limit)
            out += total[k];
    return out;
}

} // namespace

TEST(MissionStrategy, FollowsDecreasingDistances)
{
    auto ts = oracle::make_ts({"a", "b", "c"}, {{"a", "b", 2}, {"b", "c", 2}, {"c", "c", 2}}, {{"c", {"pi_sur"}}});
    auto syn = synth(ts, oracle::uniform_field(3, 2, q(1, 2)), "true");
    auto plan = build_offline_plan(syn);
    const Product& p = syn.product;
    std::vector<Weight> dist;
    StateIndex x = p.initial();
    for (int i = 0; i < 3; ++i) {
        dist.push_back(plan.mission.distance()[x].value());
        x = plan.mission.next(x);
    }
    EXPECT_EQ(dist, (std::vector<Weight>{4, 2, 0}));
    // at a target the strategy stays defined and returns to the target set
    EXPECT_TRUE(plan.in_target[x]);
    EXPECT_TRUE(plan.in_target[plan.mission.next(x)]);
}

TEST(MissionStrategy, WalksReachTargetsAtMinimumWeight)
{
    Rng rng(201);
    int checked = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto ts = oracle::random_ts(rng, 3 + rng.uniform_below(6), {"a", "pi_sur"}, 6);
        std::optional<Synthesis> syn;
        try {
            syn.emplace(synth(ts, oracle::uniform_field(ts.size(), 3, q(1, 2)), "G F a"));
        } catch (const UnsatisfiableError&) {
            continue;
        }
        ++checked;
        auto plan = build_offline_plan(*syn);
        const Product& p = syn->product;
        const auto bf_targets = syn->ascc().accepting;
        for (StateIndex v = 0; v < p.size(); ++v) {
            if (!plan.mission.defined(v))
                continue;
            auto bf = oracle::bellman_ford(p, v);
            Weight best = UINT64_MAX;
            for (StateIndex t : bf_targets)
                if (bf[t])
                    best = std::min(best, *bf[t]);
            ASSERT_EQ(plan.mission.distance()[v].value(), best);
            Weight walked = 0;
            StateIndex x = v;
            std::size_t steps = 0;
            while (!plan.in_target[x] && steps++ <= p.size()) {
                StateIndex y = plan.mission.next(x);
                walked += *transition_weight(p, x, y);
                x = y;
            }
            EXPECT_TRUE(plan.in_target[x]);
            EXPECT_EQ(walked, best);
        }
    }
    EXPECT_GT(checked, 20);
}

TEST(CycleStrategy, StepsAlongTheCycleAndApproachesIt)
{
    auto world = case_study_grid();
    auto syn = synthesize(world.ts, world.penalty, ltl::parse(case_study_formula));
    auto plan = build_offline_plan(syn);
    const CycleStrategy& cs = plan.cycle;
    for (std::size_t j = 0; j < cs.length(); ++j) {
        std::optional<std::size_t> pos = j;
        EXPECT_EQ(cs.next(cs.at(j), pos), cs.at(j + 1));
        EXPECT_EQ(pos, (j + 1) % cs.length());
    }
    // from anywhere in the product: approach weight equals the distance, then
    // a surveillance state at least once per cycle weight
    const Product& p = syn.product;
    for (StateIndex v = 0; v < p.size(); ++v) {
        if (!cs.distance()[v].reachable())
            continue;
        StateIndex x = v;
        std::optional<std::size_t> pos;
        Weight approach = 0;
        while (!cs.first_position(x)) {
            StateIndex y = cs.next(x, pos);
            approach += *transition_weight(p, x, y);
            x = y;
        }
        EXPECT_EQ(approach, cs.distance()[v].value());
        Weight since = 0;
        for (int step = 0; step < 3 * static_cast<int>(cs.length()); ++step) {
            StateIndex y = cs.next(x, pos);
            since += *transition_weight(p, x, y);
            x = y;
            if (syn.surveillance[x])
                since = 0;
            ASSERT_LE(since, cs.cycle_weight());
        }
    }
}

TEST(CycleStrategy, OffCycleStateTakesTwoApproachSteps)
{
    // t -> m -> c1 <-> c2, surveillance on the cycle
    auto ts = oracle::make_ts({"c1", "c2", "m", "t"},
                              {{"t", "m", 1}, {"m", "c1", 1}, {"c1", "c2", 1}, {"c2", "c1", 1}},
                              {{"c1", {"pi_sur"}}, {"c2", {"pi_sur"}}}, "t");
    auto syn = synth(ts, oracle::uniform_field(4, 2, q(1, 2)), "true");
    auto plan = build_offline_plan(syn);
    const Product& p = syn.product;
    StateIndex x = p.initial();
    EXPECT_EQ(plan.cycle.distance()[x], Distance{2});
    std::optional<std::size_t> pos;
    x = plan.cycle.next(x, pos);
    EXPECT_FALSE(pos);
    x = plan.cycle.next(x, pos);
    EXPECT_TRUE(plan.cycle.first_position(x));
}

TEST(CycleStrategy, SegmentWeights)
{
    auto world = case_study_grid();
    auto syn = synthesize(world.ts, world.penalty, ltl::parse(case_study_formula));
    const CycleStrategy cs(syn.product, syn.cycle());
    for (std::size_t pos = 0; pos < cs.length(); ++pos)
        for (std::size_t steps = 0; steps < 3 * cs.length(); ++steps) {
            Weight direct = 0;
            for (std::size_t k = 0; k < steps; ++k)
                direct += *transition_weight(syn.product, cs.at(pos + k), cs.at(pos + k + 1));
            ASSERT_EQ(cs.segment_weight(pos, steps), direct);
        }
}

TEST(EstimateJ, TrivialCases)
{
    auto ts = oracle::make_ts({"a", "b"}, {{"a", "b", 1}, {"b", "a", 1}}, {{"a", {"pi_sur"}}, {"b", {"pi_sur"}}});
    auto syn = synth(ts, oracle::uniform_field(2, 2, q(1)), "G F pi_sur");
    auto plan = build_offline_plan(syn);
    Rng rng(5);
    const StateIndex start = plan.cycle.at(0);
    EXPECT_EQ(estimate_j(syn, plan.cycle, syn.vstar(), q(1), start, {}, rng), 1u);
    EXPECT_EQ(estimate_j(syn, plan.cycle, syn.vstar(), q(3, 2), start, {}, rng), 1u);
    // p = 1: penalties climb to 1 and stay, the average never exceeds V* = 1
    EXPECT_EQ(syn.vstar(), q(1));
    EXPECT_EQ(estimate_j(syn, plan.cycle, syn.vstar(), q(1, 10), start, {}, rng), 1u);
    EXPECT_THROW(estimate_j(syn, plan.cycle, syn.vstar(), q(0), start, {}, rng), std::invalid_argument);
}

TEST(EstimateJ, CapIsReported)
{
    auto ts = oracle::make_ts({"a", "b"}, {{"a", "b", 1}, {"b", "a", 1}}, {{"a", {"pi_sur"}}, {"b", {"pi_sur"}}});
    auto syn = synth(ts, oracle::uniform_field(2, 2, q(1, 2)), "G F pi_sur");
    auto plan = build_offline_plan(syn);
    Rng rng(6);
    // a bound no execution meets
    try {
        estimate_j(syn, plan.cycle, q(-5), q(1, 100), plan.cycle.at(0), JEstimateOptions{50, 8}, rng);
        FAIL();
    } catch (const CapExceededError& e) {
        EXPECT_GE(e.best(), 1u);
        EXPECT_LE(e.best(), 8u);
    }
}

TEST(EstimateJ, ConsistentWithExactCylinderProbabilities)
{
    // three surveillance states on a cycle, rate 2
    auto ts = oracle::make_ts({"a", "b", "c"}, {{"a", "b", 1}, {"b", "c", 2}, {"c", "a", 1}},
                              {{"a", {"pi_sur"}}, {"b", {"pi_sur"}}, {"c", {"pi_sur"}}});
    auto field = PenaltyField::create(2, {q(1, 5), q(1, 2), q(9, 10)});
    auto syn = synth(ts, field, "G F pi_sur");
    auto plan = build_offline_plan(syn);
    const StateIndex start = plan.cycle.at(0);
    Rng rng(7);
    int useful = 0;
    for (long e = 2; e <= 9; ++e) {
        const Rational eps = q(e, 10);
        const double need = 1 - eps.get_d();
        std::vector<double> exact;
        for (std::size_t l = 1; l <= 4; l *= 2)
            exact.push_back(exact_success(syn, plan.cycle, start, l, syn.vstar() + eps).get_d());
        std::size_t j = 0;
        try {
            j = estimate_j(syn, plan.cycle, syn.vstar(), eps, start, JEstimateOptions{4000, 4}, rng);
        } catch (const CapExceededError&) {
            // then no tested l comes close to the requirement
            for (double x : exact)
                EXPECT_LT(x, need + 0.03);
            continue;
        }
        ++useful;
        const std::size_t idx = j == 1 ? 0 : j == 2 ? 1 : 2;
        EXPECT_GE(exact[idx], need - 0.03) << "eps " << eps << " j " << j;
        for (std::size_t k = 0; k < idx; ++k)
            EXPECT_LT(exact[k], need + 0.03) << "eps " << eps << " j " << j;
    }
    EXPECT_GT(useful, 0);
}

TEST(SuccessFraction, MatchesExactProbability)
{
    auto ts = oracle::make_ts({"a", "b", "c"}, {{"a", "b", 1}, {"b", "c", 2}, {"c", "a", 1}},
                              {{"a", {"pi_sur"}}, {"c", {"pi_sur"}}});
    auto field = PenaltyField::create(2, {q(1, 5), q(1, 2), q(9, 10)});
    auto syn = synth(ts, field, "G F pi_sur");
    auto plan = build_offline_plan(syn);
    Rng rng(8);
    for (std::size_t l : {1u, 2u, 3u}) {
        const Rational bound = syn.vstar() + q(1, 10);
        const double exact = exact_success(syn, plan.cycle, plan.cycle.at(0), l, bound).get_d();
        const double sampled = success_fraction(syn, plan.cycle, plan.cycle.at(0), l, bound, 20000, rng);
        EXPECT_NEAR(sampled, exact, 0.015) << l;
    }
}

TEST(RoundTracker, SingleStateLoopCompletesEveryStep)
{
    auto ts = oracle::make_ts({"s"}, {{"s", "s", 1}}, {{"s", {"pi_sur"}}});
    auto syn = synth(ts, oracle::uniform_field(1, 2, q(1)), "true");
    auto plan = build_offline_plan(syn);
    ASSERT_EQ(syn.product.size(), 1u);
    EXPECT_EQ(syn.vstar(), q(1));
    RoundTracker tracker(syn, plan.in_target, false, [](StateIndex, const Rational&) -> std::size_t {
        ADD_FAILURE() << "estimator should not be needed";
        return 1;
    });
    const StateIndex x = syn.product.initial();
    auto ev = tracker.start(x, 2, 0);
    EXPECT_TRUE(ev.entered_average);
    for (std::size_t i = 1; i <= 5; ++i) {
        ev = tracker.arrive(x, 2, i);
        EXPECT_TRUE(ev.round_completed);
        ASSERT_EQ(tracker.completed().size(), i);
        EXPECT_EQ(tracker.completed().back().reason, ExitReason::threshold);
        EXPECT_EQ(tracker.completed().back().cycles, 1u);
        EXPECT_EQ(tracker.completed().back().k, 0u);
    }
    // round 1 carries the t = 0 penalty as well: (2 + 2) / (2 * 1)
    EXPECT_EQ(tracker.completed()[0].round_appc, q(2));
    EXPECT_EQ(tracker.completed()[1].round_appc, q(1));
    EXPECT_EQ(tracker.completed()[4].cumulative_appc, q(12, 10));
}

TEST(RoundTracker, StrictModeWaitsForTheBound)
{
    auto ts = oracle::make_ts({"s", "t"}, {{"t", "s", 1}, {"s", "s", 1}}, {{"s", {"pi_sur"}}}, "t");
    auto syn = synth(ts, oracle::uniform_field(2, 2, q(1)), "true");
    auto plan = build_offline_plan(syn);
    std::size_t calls = 0;
    RoundTracker tracker(syn, plan.in_target, true, [&](StateIndex, const Rational&) -> std::size_t {
        ++calls;
        return 3;
    });
    StateIndex x = syn.product.initial();
    std::optional<std::size_t> pos;
    tracker.start(x, 0, 0);
    for (Weight time = 1; tracker.completed().size() < 2; ++time) {
        x = tracker.phase() == Phase::mission ? plan.mission.next(x) : plan.cycle.next(x, pos);
        tracker.arrive(x, 0, time);
    }
    // once per round entering phase 2, including the third round, which
    // starts inside the target
    EXPECT_EQ(calls, 3u);
    const auto& done = tracker.completed();
    EXPECT_EQ(done[0].k, 1u);
    EXPECT_EQ(done[0].cycles, 3u); // max(1, j, 1 * k)
    EXPECT_EQ(done[0].reason, ExitReason::j_bound);
    EXPECT_EQ(done[1].k, 0u);
    EXPECT_EQ(done[1].cycles, 3u);
    EXPECT_EQ(done[1].j, 3u);
}

TEST(OfflineController, CaseStudyRoundsStaySmall)
{
    auto world = case_study_grid();
    auto syn = synthesize(world.ts, world.penalty, ltl::parse(case_study_formula));
    auto plan = build_offline_plan(syn);
    OfflineController ctl(plan);
    SimulationOptions opt;
    opt.rounds = 20;
    opt.seed = 12345;
    auto res = simulate(syn, plan, ctl, opt);
    ASSERT_EQ(res.rounds.size(), 20u);
    std::size_t threshold = 0;
    for (const auto& r : res.rounds) {
        EXPECT_LE(r.cycles, 20u);
        threshold += r.reason == ExitReason::threshold;
    }
    EXPECT_GE(threshold, 19u);
    EXPECT_TRUE(verify_satisfaction(syn, plan, res.run, res.rounds.size()).ok());
}

TEST(OfflineController, AcceptingStateOnCycleKeepsMissionShort)
{
    // The accepting state is on the optimal cycle: after round 1 the mission
    // phase is over immediately.
    auto ts = oracle::make_ts({"a", "b", "i"}, {{"i", "a", 3}, {"a", "b", 1}, {"b", "a", 1}},
                              {{"a", {"pi_sur"}}, {"b", {"pi_sur"}}}, "i");
    auto syn = synth(ts, oracle::uniform_field(3, 2, q(1, 2)), "true");
    auto plan = build_offline_plan(syn);
    OfflineController ctl(plan);
    SimulationOptions opt;
    opt.rounds = 10;
    auto res = simulate(syn, plan, ctl, opt);
    ASSERT_EQ(res.rounds.size(), 10u);
    EXPECT_EQ(res.rounds[0].k, 1u);
    for (std::size_t i = 1; i < res.rounds.size(); ++i)
        EXPECT_EQ(res.rounds[i].k, 0u);
}
