#include "oracles.hpp"

#include <sstream>

#include <gtest/gtest.h>

using namespace appc;

namespace {

Rational q(long n, long d = 1) { return make_rational(n, d); }

struct CaseStudy
{
    GridWorld world = case_study_grid();
    Synthesis syn = synthesize(world.ts, world.penalty, ltl::parse(case_study_formula));
    OfflinePlan plan = build_offline_plan(syn);
};

const CaseStudy& case_study()
{
    static const CaseStudy cs;
    return cs;
}

std::string csv_of(const Synthesis& syn, const ExperimentResult& res)
{
    std::ostringstream os;
    for (StrategyKind k : {StrategyKind::offline, StrategyKind::online}) {
        write_rounds_csv(os, res, k);
        write_summary_csv(os, syn, res, k);
        for (const auto* r : res.of(k))
            write_trace_csv(os, syn, r->sim, k == StrategyKind::online);
    }
    return os.str();
}

SimulationResult run_offline(const CaseStudy& cs, std::size_t rounds, std::uint64_t seed, bool trace = true)
{
    OfflineController ctl(cs.plan);
    SimulationOptions opt;
    opt.rounds = rounds;
    opt.seed = seed;
    opt.record_trace = trace;
    return simulate(cs.syn, cs.plan, ctl, opt);
}

} // namespace

TEST(Simulate, AccountingAddsUp)
{
    const auto& cs = case_study();
    auto res = run_offline(cs, 6, 17);
    ASSERT_EQ(res.rounds.size(), 6u);
    std::uint64_t levels = 0;
    std::size_t visits = 0;
    for (const auto& r : res.rounds) {
        levels += r.level_sum;
        visits += r.visits;
        EXPECT_EQ(r.round_appc, make_rational(static_cast<long>(r.level_sum), 5 * static_cast<long>(r.visits)));
    }
    EXPECT_EQ(levels, res.total_level_sum);
    EXPECT_EQ(visits, res.total_visits);
    EXPECT_EQ(res.rounds.back().cumulative_appc, res.cumulative_appc(5));

    // the trace logs every arrival, plus the start at t = 0
    ASSERT_EQ(res.trace.size(), res.run.size());
    std::uint64_t trace_levels = 0;
    std::size_t sur = 0;
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
        trace_levels += res.trace[i].level;
        EXPECT_EQ(res.trace[i].product_state, res.run[i]);
        if (i > 0) {
            sur += cs.syn.surveillance[res.run[i]];
            EXPECT_EQ(res.trace[i].time - res.trace[i - 1].time,
                      *transition_weight(cs.syn.product, res.run[i - 1], res.run[i]));
        }
    }
    EXPECT_EQ(trace_levels, res.total_level_sum);
    EXPECT_EQ(sur, res.total_visits);
    EXPECT_EQ(res.trace.back().time, res.end_time);
}

TEST(Simulate, CertainStayFieldIsDeterministic)
{
    // p = 1 everywhere: levels climb from their initial draw and stay at the top.
    GridSpec spec;
    spec.width = 3;
    spec.height = 2;
    spec.stock_a = {0, 0};
    spec.stock_b = {0, 2};
    spec.base = {1, 1};
    spec.rate = 3;
    spec.default_prob = q(1);
    auto world = generate_grid(spec);
    auto syn = synthesize(world.ts, world.penalty, ltl::parse(case_study_formula));
    auto plan = build_offline_plan(syn);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        OfflineController ctl(plan);
        SimulationOptions opt;
        opt.rounds = 4;
        opt.seed = seed;
        opt.record_trace = true;
        auto res = simulate(syn, plan, ctl, opt);
        Rng rng(penalty_stream_seed(seed));
        const PenaltyState init = init_penalties(world.penalty, rng);
        for (const auto& row : res.trace) {
            const StateIndex s = syn.product.ts_state(row.product_state);
            EXPECT_EQ(row.level, std::min<std::uint64_t>(3, init.levels[s] + row.time));
        }
    }
}

TEST(Simulate, ZeroRoundsIsEmpty)
{
    const auto& cs = case_study();
    auto res = run_offline(cs, 0, 5);
    EXPECT_TRUE(res.rounds.empty());
    EXPECT_TRUE(res.trace.empty());
    EXPECT_EQ(res.run, std::vector<StateIndex>{cs.syn.product.initial()});
    EXPECT_EQ(res.total_visits, 0u);
    EXPECT_EQ(res.cumulative_appc(5), 0);
    EXPECT_TRUE(verify_satisfaction(cs.syn, cs.plan, res.run, 0).ok());
}

TEST(Simulate, SameSeedSameRun)
{
    const auto& cs = case_study();
    auto a = run_offline(cs, 3, 8);
    auto b = run_offline(cs, 3, 8);
    EXPECT_EQ(a.run, b.run);
    EXPECT_EQ(a.total_level_sum, b.total_level_sum);
    auto c = run_offline(cs, 3, 9);
    EXPECT_NE(a.total_level_sum * 1000 + a.run.size(), c.total_level_sum * 1000 + c.run.size());
}

TEST(Verify, FlagsCorruptedTraces)
{
    const auto& cs = case_study();
    const Product& p = cs.syn.product;
    auto res = run_offline(cs, 2, 4, false);
    ASSERT_TRUE(verify_satisfaction(cs.syn, cs.plan, res.run, 2).ok());

    auto wrong_start = res.run;
    wrong_start.erase(wrong_start.begin());
    EXPECT_FALSE(verify_satisfaction(cs.syn, cs.plan, wrong_start, 2).ok());

    auto jump = res.run;
    StateIndex far = 0;
    while (transition_weight(p, jump[0], far) || far == jump[0])
        ++far;
    jump.insert(jump.begin() + 1, far);
    auto rep = verify_satisfaction(cs.syn, cs.plan, jump, 2);
    ASSERT_FALSE(rep.ok());
    EXPECT_NE(rep.violations.front().find("not a product transition"), std::string::npos);

    auto outside = res.run;
    outside.push_back(static_cast<StateIndex>(p.size() + 3));
    EXPECT_FALSE(verify_satisfaction(cs.syn, cs.plan, outside, 2).ok());

    // claiming more rounds than accepting visits
    EXPECT_FALSE(verify_satisfaction(cs.syn, cs.plan, res.run, res.run.size() + 1).ok());
    EXPECT_FALSE(verify_satisfaction(cs.syn, cs.plan, std::vector<StateIndex>{}, 1).ok());
}

TEST(Verify, StateThatCannotReachTheTargetIsAViolation)
{
    // i can go to a sink loop without the surveillance label; that state
    // survives pruning but cannot reach the chosen component.
    auto ts = oracle::make_ts({"i", "l", "r"}, {{"i", "l", 1}, {"i", "r", 1}, {"l", "l", 1}, {"r", "r", 1}},
                              {{"l", {"pi_sur"}}}, "i");
    auto syn = synthesize(ts, oracle::uniform_field(3, 2, q(1, 2)), ltl::parse("true"));
    auto plan = build_offline_plan(syn);
    const Product& p = syn.product;
    const StateIndex i = p.initial(), l = *p.index_of("l|q0"), r = *p.index_of("r|q0");
    EXPECT_TRUE(verify_satisfaction(syn, plan, std::vector<StateIndex>{i, l, l}, 1).ok());
    EXPECT_FALSE(verify_satisfaction(syn, plan, std::vector<StateIndex>{i, r, r}, 1).ok());
}

TEST(Simulate, RandomInstancesSatisfyTheSpecification)
{
    Rng rng(401);
    int instances = 0;
    for (int trial = 0; trial < 200 && instances < 30; ++trial) {
        auto world = generate_grid(oracle::random_grid_spec(rng));
        std::optional<Synthesis> syn;
        try {
            syn.emplace(synthesize(world.ts, world.penalty, ltl::parse(case_study_formula)));
        } catch (const UnsatisfiableError&) {
            continue;
        }
        ++instances;
        ExperimentConfig cfg;
        cfg.rounds = 5;
        cfg.seed = rng.next();
        cfg.replications = 2;
        cfg.strategies = {StrategyKind::offline, StrategyKind::online};
        cfg.threads = 1;
        auto res = run_experiment(*syn, cfg);
        for (const auto& r : res.runs) {
            EXPECT_TRUE(r.report.ok()) << r.report.violations.front();
            EXPECT_EQ(r.sim.rounds.size(), 5u);
            EXPECT_GE(r.report.accepting_visits, 5u);
        }
    }
    EXPECT_GE(instances, 20);
}

TEST(Experiment, OutputDoesNotDependOnThreads)
{
    const auto& cs = case_study();
    ExperimentConfig cfg;
    cfg.rounds = 3;
    cfg.seed = 123;
    cfg.replications = 4;
    cfg.strategies = {StrategyKind::offline, StrategyKind::online};
    cfg.record_trace = true;
    cfg.threads = 1;
    const std::string serial = csv_of(cs.syn, run_experiment(cs.syn, cfg));
    cfg.threads = 4;
    EXPECT_EQ(csv_of(cs.syn, run_experiment(cs.syn, cfg)), serial);
    EXPECT_EQ(csv_of(cs.syn, run_experiment(cs.syn, cfg)), serial);
}

TEST(Experiment, ReplicationsShareSeedsAcrossStrategies)
{
    const auto& cs = case_study();
    ExperimentConfig cfg;
    cfg.rounds = 1;
    cfg.replications = 3;
    cfg.seed = 40;
    cfg.strategies = {StrategyKind::offline, StrategyKind::online};
    auto res = run_experiment(cs.syn, cfg);
    auto off = res.of(StrategyKind::offline);
    auto on = res.of(StrategyKind::online);
    ASSERT_EQ(off.size(), 3u);
    ASSERT_EQ(on.size(), 3u);
    for (std::size_t r = 0; r < 3; ++r) {
        EXPECT_EQ(off[r]->seed, on[r]->seed);
        EXPECT_EQ(off[r]->seed, replication_seed(40, r));
    }
    EXPECT_THROW(parse_strategy("greedy"), ValidationError);
}

TEST(TraceCsv, Columns)
{
    const auto& cs = case_study();
    auto res = run_offline(cs, 1, 3);
    std::ostringstream plain, extended;
    write_trace_csv(plain, cs.syn, res, false);
    write_trace_csv(extended, cs.syn, res, true);
    const std::string p = plain.str(), e = extended.str();
    EXPECT_EQ(p.substr(0, p.find('\n')), "time,round,phase,product_state,ts_state,penalty,cycles_done");
    EXPECT_EQ(e.substr(0, e.find('\n')),
              "time,round,phase,product_state,ts_state,penalty,cycles_done,candidates_evaluated");
    EXPECT_EQ(static_cast<std::size_t>(std::count(p.begin(), p.end(), '\n')), res.trace.size() + 1);
    const std::string first = p.substr(p.find('\n') + 1);
    EXPECT_EQ(first.substr(0, first.find(',', 2) + 1), "0,1,");
}

TEST(Grid, TwoCells)
{
    GridSpec spec;
    spec.width = 2;
    spec.height = 1;
    spec.stock_a = {0, 0};
    spec.stock_b = {0, 1};
    spec.base = {0, 0};
    auto world = generate_grid(spec);
    ASSERT_EQ(world.ts.size(), 2u);
    EXPECT_EQ(world.ts.transition_count(), 2u);
    EXPECT_EQ(*transition_weight(world.ts, 0, 1), 2u);
    EXPECT_EQ(*transition_weight(world.ts, 1, 0), 2u);
    EXPECT_EQ(world.ts.id(world.ts.initial()), "r00c00");
}

TEST(Grid, NeighbourhoodMatchesGeometry)
{
    const auto world = case_study_grid();
    const auto spec = case_study_grid_spec();
    ASSERT_EQ(world.ts.size(), 80u);
    std::size_t straight = 0, diagonal = 0;
    for (int r = 0; r < spec.height; ++r)
        for (int c = 0; c < spec.width; ++c) {
            const StateIndex s = *world.ts.index_of(cell_id({r, c}));
            std::size_t expected = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const int rr = r + dr, cc = c + dc;
                    if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= spec.height || cc >= spec.width)
                        continue;
                    ++expected;
                    const auto w = transition_weight(world.ts, s, *world.ts.index_of(cell_id({rr, cc})));
                    ASSERT_TRUE(w);
                    EXPECT_EQ(*w, dr != 0 && dc != 0 ? 3u : 2u);
                    ++(dr != 0 && dc != 0 ? diagonal : straight);
                }
            EXPECT_EQ(world.ts.successors(s).size(), expected);
        }
    // 2 (rows (w-1) + cols (h-1)) straight, 4 (w-1)(h-1) diagonal
    EXPECT_EQ(straight, 2u * (8 * 9 + 10 * 7));
    EXPECT_EQ(diagonal, 4u * 9 * 7);
    EXPECT_EQ(world.ts.transition_count(), straight + diagonal);
    EXPECT_EQ(world.ts.successors(*world.ts.index_of("r03c03")).size(), 8u);
    for (StateIndex s = 0; s < world.ts.size(); ++s) {
        EXPECT_GE(world.penalty.prob(s), q(1, 10));
        EXPECT_LE(world.penalty.prob(s), q(9, 10));
    }
}

TEST(Grid, LabelsAndValidation)
{
    const auto world = case_study_grid();
    auto has = [&](const char* cell, const char* prop) {
        return world.ts.has_label(*world.ts.index_of(cell), prop);
    };
    EXPECT_TRUE(has("r01c01", "a"));
    EXPECT_TRUE(has("r01c01", "pi_sur"));
    EXPECT_TRUE(has("r01c08", "b"));
    EXPECT_TRUE(has("r06c04", "c"));
    EXPECT_TRUE(has("r03c04", "u"));
    EXPECT_FALSE(has("r06c04", "pi_sur"));
    EXPECT_EQ(world.ts.id(world.ts.initial()), "r06c04");

    GridSpec bad;
    bad.width = 1;
    bad.height = 1;
    EXPECT_THROW(generate_grid(bad), ValidationError);
    bad.width = 3;
    bad.stock_b = {0, 0};
    EXPECT_THROW(generate_grid(bad), ValidationError);
    bad.stock_b = {0, 5};
    EXPECT_THROW(generate_grid(bad), ValidationError);
    bad.stock_b = {0, 2};
    bad.unsafe = {{0, 1}};
    EXPECT_NO_THROW(generate_grid(bad));
    bad.unsafe = {{0, 2}};
    EXPECT_THROW(generate_grid(bad), ValidationError);
}
