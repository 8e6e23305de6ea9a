#pragma once

#include "appc/offline.hpp"
#include "appc/online.hpp"
#include "appc/simulation.hpp"
#include "appc/synthesis.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace appc {

enum class StrategyKind { offline, online };

inline const char* to_string(StrategyKind k) { return k == StrategyKind::offline ? "offline" : "online"; }

inline StrategyKind parse_strategy(const std::string& s)
{
    if (s == "offline")
        return StrategyKind::offline;
    if (s == "online")
        return StrategyKind::online;
    throw ValidationError("unknown strategy '" + s + "' (expected offline or online)");
}

struct ExperimentConfig
{
    std::size_t rounds = 20;
    std::uint64_t seed = 1;
    std::size_t replications = 1;
    std::vector<StrategyKind> strategies{StrategyKind::offline};
    OnlineConfig online;
    bool strict = false;
    JEstimateOptions j;
    bool record_trace = false;
    unsigned threads = 0; // 0: hardware concurrency
};

struct ReplicationResult
{
    StrategyKind strategy = StrategyKind::offline;
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    SimulationResult sim;
    SatisfactionReport report;
};

struct ExperimentResult
{
    std::vector<ReplicationResult> runs; // grouped by strategy, then replication

    [[nodiscard]] std::vector<const ReplicationResult*> of(StrategyKind k) const
    {
        std::vector<const ReplicationResult*> out;
        for (const auto& r : runs)
            if (r.strategy == k)
                out.push_back(&r);
        return out;
    }
};

/// Seed of replication `index`; offline and online runs of the same index
/// share it and therefore the penalty field.
inline std::uint64_t replication_seed(std::uint64_t master, std::size_t index) { return master ^ index; }

/// Runs every (strategy, replication) pair on its own thread-pool slot. Each
/// simulation owns its generators, so results do not depend on scheduling.
inline ExperimentResult run_experiment(const Synthesis& syn, const ExperimentConfig& cfg)
{
    const OfflinePlan plan = build_offline_plan(syn);
    std::optional<OnlinePlanner> planner;
    if (std::find(cfg.strategies.begin(), cfg.strategies.end(), StrategyKind::online) != cfg.strategies.end())
        planner.emplace(syn, plan, cfg.online);

    ExperimentResult out;
    for (StrategyKind k : cfg.strategies)
        for (std::size_t r = 0; r < cfg.replications; ++r)
            out.runs.push_back(ReplicationResult{k, r, replication_seed(cfg.seed, r), {}, {}});

    SimulationOptions base;
    base.rounds = cfg.rounds;
    base.strict = cfg.strict;
    base.j = cfg.j;
    base.record_trace = cfg.record_trace;

    auto run_one = [&](ReplicationResult& job) {
        SimulationOptions opt = base;
        opt.seed = job.seed;
        if (job.strategy == StrategyKind::offline) {
            OfflineController ctl(plan);
            job.sim = simulate(syn, plan, ctl, opt);
        } else {
            OnlineController ctl(*planner);
            job.sim = simulate(syn, plan, ctl, opt);
        }
        job.report = verify_satisfaction(syn, plan, job.sim.run, job.sim.rounds.size());
    };

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, out.runs.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(out.runs.size());
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < out.runs.size();) {
            try {
                run_one(out.runs[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

/// Decimal columns are rounded half away from zero to nine digits.
inline void write_rounds_csv(std::ostream& os, const ExperimentResult& res, StrategyKind k)
{
    os << "replication,round,k_i,cycles,round_appc,cumulative_appc\n";
    for (const auto* r : res.of(k))
        for (const auto& st : r->sim.rounds)
            os << r->replication << ',' << st.round << ',' << st.k << ',' << st.cycles << ','
               << to_decimal(st.round_appc) << ',' << to_decimal(st.cumulative_appc) << '\n';
}

inline void write_summary_csv(std::ostream& os, const Synthesis& syn, const ExperimentResult& res, StrategyKind k)
{
    os << "replication,final_appc,accepting_visits,violations\n";
    for (const auto* r : res.of(k))
        os << r->replication << ',' << to_decimal(r->sim.cumulative_appc(syn.penalty.rate())) << ','
           << r->report.accepting_visits << ',' << r->report.violations.size() << '\n';
}

} // namespace appc
