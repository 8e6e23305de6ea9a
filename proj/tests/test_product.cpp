#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace appc;

namespace {

/// Product recomputed from scratch: full reachable pairs, then states
/// without successors removed until none are left.
struct Recount
{
    std::set<ProductState> states;
    std::set<std::pair<ProductState, ProductState>> edges;
};

Recount recount(const TransitionSystem& ts, const BuchiAutomaton& ba)
{
    Recount out;
    std::map<ProductState, std::set<ProductState>> succ;
    std::vector<ProductState> todo{{ts.initial(), ba.initial}};
    out.states.insert(todo.back());
    while (!todo.empty()) {
        const ProductState x = todo.back();
        todo.pop_back();
        const auto letter = ba.letter(ts.labels(x.ts));
        for (const Edge& e : ts.successors(x.ts))
            for (const BuchiEdge& b : ba.edges[x.ba])
                if (b.guard.admits(letter)) {
                    ProductState y{e.to, b.to};
                    succ[x].insert(y);
                    if (out.states.insert(y).second)
                        todo.push_back(y);
                }
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (auto it = out.states.begin(); it != out.states.end();) {
            bool alive = false;
            for (const auto& y : succ[*it])
                alive = alive || out.states.contains(y);
            if (!alive) {
                it = out.states.erase(it);
                changed = true;
            } else {
                ++it;
            }
        }
    }
    for (const auto& x : out.states)
        for (const auto& y : succ[x])
            if (out.states.contains(y))
                out.edges.insert({x, y});
    return out;
}

void expect_matches_recount(const Product& p, const TransitionSystem& ts, const BuchiAutomaton& ba)
{
    const Recount r = recount(ts, ba);
    std::set<ProductState> states;
    std::set<std::pair<ProductState, ProductState>> edges;
    for (StateIndex v = 0; v < p.size(); ++v) {
        states.insert(p.state(v));
        for (const Edge& e : p.successors(v)) {
            edges.insert({p.state(v), p.state(e.to)});
            EXPECT_EQ(e.weight, *transition_weight(ts, p.ts_state(v), p.ts_state(e.to)));
        }
        if (v > 0)
            EXPECT_LT(p.state(v - 1), p.state(v));
    }
    EXPECT_EQ(states, r.states);
    EXPECT_EQ(edges, r.edges);
}

} // namespace

TEST(Product, SingleAcceptingLoop)
{
    auto ts = oracle::make_ts({"s"}, {{"s", "s", 1}}, {{"s", {"a"}}});
    auto ba = to_buchi(ltl::parse("G a"));
    Product p = build_product(ts, ba);
    ASSERT_GE(p.size(), 1u);
    expect_matches_recount(p, ts, ba);
    auto analysis = accepting_sccs(p, "a");
    ASSERT_EQ(analysis.candidates.size(), 1u);
    EXPECT_TRUE(analysis.excluded.empty());
    EXPECT_EQ(p.id(p.initial()).substr(0, 2), "s|");
}

TEST(Product, NoAcceptingComponentWhenFormulaForbidsTheOnlyLabel)
{
    // the completed automaton keeps a rejecting sink, so only the component
    // search can tell
    auto ts = oracle::make_ts({"s"}, {{"s", "s", 1}}, {{"s", {"a"}}});
    Product p = build_product(ts, to_buchi(ltl::parse("G !a")));
    EXPECT_THROW(accepting_sccs(p, "a"), UnsatisfiableError);
}

TEST(Product, CaseStudyMatchesRecount)
{
    auto world = case_study_grid();
    auto ba = to_buchi(ltl::parse(case_study_formula));
    Product p = build_product(world.ts, ba);
    expect_matches_recount(p, world.ts, ba);
    auto analysis = accepting_sccs(p, default_surveillance_prop);
    EXPECT_GE(analysis.candidates.size(), 1u);
}

TEST(Product, IdsRoundTrip)
{
    auto world = case_study_grid();
    Product p = build_product(world.ts, to_buchi(ltl::parse(case_study_formula)));
    for (StateIndex v = 0; v < p.size(); ++v)
        EXPECT_EQ(p.index_of(p.id(v)), v);
    EXPECT_FALSE(p.index_of("nowhere|q0"));
    EXPECT_FALSE(p.index_of("r00c00|q999"));
    EXPECT_FALSE(p.index_of("r00c00"));
    EXPECT_FALSE(p.index_of("r00c00|q1x"));
}

TEST(ProjectRun, WeightsAndValidity)
{
    auto world = case_study_grid();
    Product p = build_product(world.ts, to_buchi(ltl::parse(case_study_formula)));
    EXPECT_EQ(project_run(p, FiniteRun{{p.initial()}}).states, std::vector<StateIndex>{p.ts_state(p.initial())});
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        FiniteRun run{{p.initial()}};
        for (int step = 0; step < 30; ++step) {
            auto succ = p.successors(run.last());
            run.states.push_back(succ[rng.uniform_below(succ.size())].to);
        }
        FiniteRun proj = project_run(p, run);
        ASSERT_TRUE(is_valid_run(world.ts, proj));
        EXPECT_EQ(run_weight(p, run), run_weight(world.ts, proj));
    }
}

TEST(AcceptingSccs, TransientAcceptingStateIsExcluded)
{
    auto ts = oracle::make_ts({"s"}, {{"s", "s", 1}}, {{"s", {"z"}}});
    BuchiAutomaton ba;
    ba.edges = {{BuchiEdge{1, Guard{}}}, {BuchiEdge{1, Guard{}}}};
    ba.accepting = {true, true};
    Product p = build_product(ts, ba);
    ASSERT_EQ(p.size(), 2u);
    auto analysis = accepting_sccs(p, "z");
    ASSERT_EQ(analysis.candidates.size(), 1u);
    EXPECT_EQ(analysis.candidates[0].states, (std::vector<StateIndex>{*p.index_of(ProductState{0, 1})}));
    EXPECT_FALSE(analysis.candidates[0].contains(*p.index_of(ProductState{0, 0})));
}

TEST(AcceptingSccs, ComponentWithoutSurveillanceIsExcluded)
{
    // Two absorbing loops; only one carries the surveillance label.
    auto ts = oracle::make_ts({"i", "l", "r"}, {{"i", "l", 1}, {"i", "r", 1}, {"l", "l", 1}, {"r", "r", 1}},
                              {{"l", {"pi_sur"}}}, "i");
    Product p = build_product(ts, to_buchi(ltl::parse("true")));
    auto analysis = accepting_sccs(p, "pi_sur");
    ASSERT_EQ(analysis.candidates.size(), 1u);
    ASSERT_EQ(analysis.excluded.size(), 1u);
    EXPECT_EQ(p.ts().id(p.ts_state(analysis.candidates[0].states[0])), "l");
    EXPECT_EQ(p.ts().id(p.ts_state(analysis.excluded[0].states[0])), "r");
}

TEST(AcceptingSccs, MatchReachabilityOracle)
{
    Rng rng(43);
    const char* formulas[] = {"G F a", "F G a", "G (a -> X !a)", "a U G b", "G F a & G F b", "F a"};
    int checked = 0;
    for (int trial = 0; trial < 120; ++trial) {
        auto ts = oracle::random_ts(rng, 2 + rng.uniform_below(5), {"a", "b", "pi_sur"}, 5);
        auto ba = to_buchi(ltl::parse(formulas[trial % 6]));
        std::optional<Product> p;
        try {
            p.emplace(build_product(ts, ba));
        } catch (const UnsatisfiableError&) {
            continue;
        }
        if (p->size() > 12)
            continue;
        ++checked;
        const auto r = oracle::reachability(*p);
        std::set<std::vector<StateIndex>> expected;
        for (StateIndex v = 0; v < p->size(); ++v) {
            if (!r[v][v])
                continue;
            std::vector<StateIndex> cls;
            bool acc = false;
            for (StateIndex w = 0; w < p->size(); ++w)
                if (v == w || (r[v][w] && r[w][v])) {
                    cls.push_back(w);
                    acc = acc || p->accepting(w);
                }
            if (acc)
                expected.insert(cls);
        }
        std::set<std::vector<StateIndex>> got;
        try {
            auto a = accepting_sccs(*p, "pi_sur");
            for (const auto& u : a.candidates) {
                got.insert(u.states);
                EXPECT_FALSE(u.surveillance.empty());
            }
            for (const auto& u : a.excluded) {
                got.insert(u.states);
                EXPECT_TRUE(u.surveillance.empty());
            }
        } catch (const UnsatisfiableError&) {
        }
        EXPECT_EQ(got, expected);
    }
    EXPECT_GT(checked, 30);
}
