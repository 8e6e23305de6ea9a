#pragma once

#include "appc/error.hpp"
#include "appc/penalty.hpp"
#include "appc/synthesis.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace appc {

namespace detail {

/// Successor minimizing w(v, y) + d(y); the smallest such y on ties.
template <WeightedDigraph G>
std::vector<std::optional<StateIndex>> greedy_successors(const G& g, const std::vector<Distance>& d)
{
    std::vector<std::optional<StateIndex>> next(g.size());
    for (StateIndex v = 0; v < g.size(); ++v) {
        Distance best = Distance::unreachable();
        for (const Edge& e : g.successors(v)) {
            Distance via = d[e.to] + e.weight;
            if (via < best) {
                best = via;
                next[v] = e.to;
            }
        }
    }
    return next;
}

} // namespace detail

/// Memoryless strategy following minimum-weight runs to the accepting states
/// of the chosen component.
class MissionStrategy
{
public:
    MissionStrategy(const Product& p, std::span<const StateIndex> targets)
        : distance_(distances_to(p, targets)), next_(detail::greedy_successors(p, distance_))
    {
        if (!distance_[p.initial()].reachable())
            throw UnsatisfiableError("the accepting states of the chosen component are unreachable");
    }

    [[nodiscard]] const std::vector<Distance>& distance() const { return distance_; }
    [[nodiscard]] bool defined(StateIndex v) const { return distance_[v].reachable(); }

    [[nodiscard]] StateIndex next(StateIndex v) const
    {
        if (!distance_[v].reachable() || !next_[v])
            throw std::logic_error("mission strategy undefined in this state");
        return *next_[v];
    }

private:
    std::vector<Distance> distance_;
    std::vector<std::optional<StateIndex>> next_;
};

/// Follows the optimal cycle, approaching it along minimum-weight runs. The
/// position on the cycle is the strategy's memory; a state met off the
/// remembered position is placed at its first occurrence.
class CycleStrategy
{
public:
    CycleStrategy(const Product& p, const OptimalCycle& oc) : cycle_(oc.cycle), first_(p.size())
    {
        if (cycle_.states.empty())
            throw std::invalid_argument("empty cycle");
        for (std::size_t i = cycle_.states.size(); i-- > 0;)
            first_[cycle_.states[i]] = i;
        std::vector<StateIndex> members(cycle_.states.begin(), cycle_.states.end());
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        distance_ = distances_to(p, members);
        approach_ = detail::greedy_successors(p, distance_);

        surveillance_ = oc.surveillance_positions;
        weight_to_.assign(cycle_.states.size() + 1, 0);
        for (std::size_t i = 0; i < cycle_.states.size(); ++i)
            weight_to_[i + 1] =
                weight_to_[i] + *transition_weight(p, cycle_.states[i], cycle_.states[(i + 1) % cycle_.states.size()]);
    }

    [[nodiscard]] const FiniteRun& cycle() const { return cycle_; }
    [[nodiscard]] std::size_t length() const { return cycle_.states.size(); }
    [[nodiscard]] StateIndex at(std::size_t pos) const { return cycle_.states[pos % cycle_.states.size()]; }
    [[nodiscard]] const std::vector<Distance>& distance() const { return distance_; }
    [[nodiscard]] std::optional<std::size_t> first_position(StateIndex v) const { return first_[v]; }
    [[nodiscard]] const std::vector<std::size_t>& surveillance_positions() const { return surveillance_; }
    [[nodiscard]] Weight cycle_weight() const { return weight_to_.back(); }

    /// Weight of following the cycle for `steps` transitions from `pos`.
    [[nodiscard]] Weight segment_weight(std::size_t pos, std::size_t steps) const
    {
        const std::size_t len = length();
        Weight total = (steps / len) * cycle_weight();
        pos %= len;
        std::size_t rest = steps % len;
        if (pos + rest <= len)
            return total + weight_to_[pos + rest] - weight_to_[pos];
        return total + weight_to_[len] - weight_to_[pos] + weight_to_[pos + rest - len];
    }

    /// Cycle index at which the current state sits, honouring the memory.
    [[nodiscard]] std::optional<std::size_t> locate(StateIndex current, std::optional<std::size_t> memory) const
    {
        if (memory && at(*memory) == current)
            return *memory % length();
        return first_[current];
    }

    StateIndex next(StateIndex current, std::optional<std::size_t>& position) const
    {
        if (auto pos = locate(current, position)) {
            position = (*pos + 1) % length();
            return at(*position);
        }
        position.reset();
        if (!approach_[current])
            throw std::logic_error("cycle strategy undefined in this state");
        return *approach_[current];
    }

private:
    FiniteRun cycle_;
    std::vector<std::optional<std::size_t>> first_;
    std::vector<Distance> distance_;
    std::vector<std::optional<StateIndex>> approach_;
    std::vector<std::size_t> surveillance_;
    std::vector<Weight> weight_to_;
};

/// Mission and cycle strategies of the chosen component.
struct OfflinePlan
{
    MissionStrategy mission;
    CycleStrategy cycle;
    std::vector<bool> in_target; // accepting states of the chosen component
};

inline OfflinePlan build_offline_plan(const Synthesis& syn)
{
    std::vector<bool> in_target(syn.product.size(), false);
    for (StateIndex v : syn.ascc().accepting)
        in_target[v] = true;
    return OfflinePlan{MissionStrategy(syn.product, syn.ascc().accepting), CycleStrategy(syn.product, syn.cycle()),
                       std::move(in_target)};
}

namespace detail {

/// Levels of the penalty processes, drawn only for states actually visited.
/// Equivalent in distribution to stepping every process in lockstep.
class LazyPenalties
{
public:
    LazyPenalties(const PenaltyField& field, Rng& rng) : field_(field), rng_(rng), level_(field.size()), last_(field.size(), 0), seen_(field.size(), false) {}

    Level observe(StateIndex s, std::uint64_t time)
    {
        if (!seen_[s]) {
            seen_[s] = true;
            level_[s] = static_cast<Level>(rng_.uniform_below(field_.rate() + 1));
        }
        std::uint64_t steps = time - last_[s];
        last_[s] = time;
        const Level top = field_.rate();
        Level level = level_[s];
        while (steps > 0) {
            if (level < top) {
                std::uint64_t climb = std::min<std::uint64_t>(steps, top - level);
                level += static_cast<Level>(climb);
                steps -= climb;
            } else {
                if (!stays_at_top(field_, s, rng_))
                    level = 0;
                --steps;
            }
        }
        level_[s] = level;
        return level;
    }

private:
    const PenaltyField& field_;
    Rng& rng_;
    std::vector<Level> level_;
    std::vector<std::uint64_t> last_;
    std::vector<bool> seen_;
};

} // namespace detail

/// Fraction of `samples` simulated executions of the cycle strategy from
/// `start`, each completing `cycles` surveillance cycles, whose penalty per
/// cycle is at most `bound`. The start state's own penalty is not counted.
inline double success_fraction(const Synthesis& syn, const CycleStrategy& cs, StateIndex start, std::size_t cycles,
                               const Rational& bound, std::size_t samples, Rng& rng)
{
    const Product& p = syn.product;
    // sum of levels / rate <= bound * cycles
    Rational limit = bound * static_cast<long>(cycles) * static_cast<long>(syn.penalty.rate());
    mpz_class floor_limit;
    mpz_fdiv_q(floor_limit.get_mpz_t(), limit.get_num_mpz_t(), limit.get_den_mpz_t());
    std::size_t good = 0;
    for (std::size_t k = 0; k < samples; ++k) {
        detail::LazyPenalties pen(syn.penalty, rng);
        StateIndex x = start;
        std::optional<std::size_t> pos;
        std::uint64_t time = 0;
        std::uint64_t sum = 0;
        for (std::size_t done = 0; done < cycles;) {
            StateIndex y = cs.next(x, pos);
            time += *transition_weight(p, x, y);
            x = y;
            sum += pen.observe(p.ts_state(x), time);
            if (syn.surveillance[x])
                ++done;
        }
        if (mpz_class(sum) <= floor_limit)
            ++good;
    }
    return static_cast<double>(good) / static_cast<double>(samples);
}

struct JEstimateOptions
{
    std::size_t samples = 200;
    std::size_t cap = 10000;
};

/// Smallest l in 1, 2, 4, ... such that at least a 1 - epsilon fraction of
/// simulated l-cycle executions average at most vstar + epsilon. Throws
/// CapExceededError with the best l tried when l would pass the cap.
inline std::size_t estimate_j(const Synthesis& syn, const CycleStrategy& cs, const Rational& vstar,
                              const Rational& epsilon, StateIndex start, const JEstimateOptions& opt, Rng& rng)
{
    if (epsilon <= 0)
        throw std::invalid_argument("epsilon must be positive");
    if (epsilon >= 1)
        return 1;
    const double need = 1.0 - epsilon.get_d();
    const Rational bound = vstar + epsilon;
    std::size_t best = 1;
    double best_fraction = -1;
    for (std::size_t l = 1; l <= opt.cap; l *= 2) {
        double frac = success_fraction(syn, cs, start, l, bound, opt.samples, rng);
        if (frac >= need)
            return l;
        if (frac > best_fraction) {
            best_fraction = frac;
            best = l;
        }
    }
    throw CapExceededError("cycle count estimate exceeded the cap of " + std::to_string(opt.cap), best);
}

enum class Phase { mission, average };
enum class ExitReason { threshold, j_bound };

inline const char* to_string(Phase p) { return p == Phase::mission ? "mission" : "average"; }
inline const char* to_string(ExitReason r) { return r == ExitReason::threshold ? "threshold" : "j_bound"; }

struct RoundStats
{
    std::size_t round = 0;
    std::size_t k = 0;      // phase-1 steps
    std::size_t cycles = 0; // phase-2 surveillance cycles
    std::uint64_t level_sum = 0;
    std::size_t visits = 0; // surveillance cycles over the whole round
    Rational round_appc;
    Rational cumulative_appc;
    std::size_t accepting_visits = 0; // so far
    ExitReason reason = ExitReason::threshold;
    std::optional<std::size_t> j;
    std::uint64_t end_time = 0;
};

/// Phase and round bookkeeping shared by the offline and online controllers.
/// A round ends at a surveillance visit in phase 2; that visit belongs to
/// the ending round and the next round starts from the same state.
class RoundTracker
{
public:
    using JEstimator = std::function<std::size_t(StateIndex start, const Rational& epsilon)>;

    struct Arrival
    {
        bool entered_average = false;
        bool round_completed = false;
    };

    RoundTracker(const Synthesis& syn, const std::vector<bool>& in_target, bool strict, JEstimator estimator)
        : syn_(syn), in_target_(in_target), strict_(strict), estimator_(std::move(estimator))
    {
    }

    Arrival start(StateIndex x, Level level, std::uint64_t time)
    {
        time_ = time;
        account(x, level, true);
        return begin_round(x);
    }

    Arrival arrive(StateIndex x, Level level, std::uint64_t time)
    {
        time_ = time;
        account(x, level, false);
        Arrival ev;
        if (phase_ == Phase::mission) {
            ++k_;
            if (in_target_[x])
                ev = enter_average(x);
            return ev;
        }
        if (!syn_.surveillance[x])
            return ev;
        ++cycles_;
        const Rational round_avg = make_rational(static_cast<long>(level_sum_), static_cast<long>(syn_.penalty.rate() * visits_));
        const std::size_t ik = round_ * k_;
        if (strict_) {
            if (cycles_ >= std::max<std::size_t>({1, *j_, ik}))
                return complete(x, ExitReason::j_bound);
            return ev;
        }
        if (round_avg <= threshold())
            return complete(x, ExitReason::threshold);
        if (cycles_ >= ik) {
            if (!j_)
                j_ = estimate(x);
            if (cycles_ >= std::max(*j_, ik))
                return complete(x, ExitReason::j_bound);
        }
        return ev;
    }

    [[nodiscard]] Rational threshold() const
    {
        Rational t = syn_.vstar() + make_rational(2, static_cast<long>(round_));
        t.canonicalize();
        return t;
    }

    [[nodiscard]] std::size_t round() const { return round_; }
    [[nodiscard]] Phase phase() const { return phase_; }
    [[nodiscard]] std::size_t k() const { return k_; }
    [[nodiscard]] std::size_t cycles_done() const { return cycles_; }
    [[nodiscard]] std::uint64_t level_sum() const { return level_sum_; }
    [[nodiscard]] std::size_t visits() const { return visits_; }
    [[nodiscard]] std::size_t accepting_visits() const { return accepting_visits_; }
    [[nodiscard]] std::uint64_t total_level_sum() const { return total_levels_; }
    [[nodiscard]] std::size_t total_visits() const { return total_visits_; }
    [[nodiscard]] const std::vector<RoundStats>& completed() const { return completed_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

private:
    void account(StateIndex x, Level level, bool initial)
    {
        level_sum_ += level;
        total_levels_ += level;
        if (syn_.product.accepting(x))
            ++accepting_visits_;
        if (!initial && syn_.surveillance[x]) {
            ++visits_;
            ++total_visits_;
        }
    }

    Arrival begin_round(StateIndex x)
    {
        phase_ = Phase::mission;
        k_ = 0;
        cycles_ = 0;
        j_.reset();
        if (in_target_[x])
            return enter_average(x);
        return {};
    }

    Arrival enter_average(StateIndex x)
    {
        phase_ = Phase::average;
        if (strict_)
            j_ = estimate(x);
        return Arrival{true, false};
    }

    std::size_t estimate(StateIndex x)
    {
        Rational eps = make_rational(1, static_cast<long>(round_));
        try {
            return estimator_(x, eps);
        } catch (const CapExceededError& e) {
            warnings_.push_back("round " + std::to_string(round_) + ": " + e.what() + "; using " +
                                std::to_string(e.best()));
            return e.best();
        }
    }

    Arrival complete(StateIndex x, ExitReason reason)
    {
        RoundStats st;
        st.round = round_;
        st.k = k_;
        st.cycles = cycles_;
        st.level_sum = level_sum_;
        st.visits = visits_;
        const long rate = static_cast<long>(syn_.penalty.rate());
        st.round_appc = make_rational(static_cast<long>(level_sum_), rate * static_cast<long>(visits_));
        st.cumulative_appc = make_rational(static_cast<long>(total_levels_), rate * static_cast<long>(total_visits_));
        st.accepting_visits = accepting_visits_;
        st.reason = reason;
        st.j = j_;
        st.end_time = time_;
        completed_.push_back(std::move(st));

        ++round_;
        level_sum_ = 0;
        visits_ = 0;
        Arrival ev = begin_round(x);
        ev.round_completed = true;
        return ev;
    }

    const Synthesis& syn_;
    const std::vector<bool>& in_target_;
    bool strict_;
    JEstimator estimator_;

    std::size_t round_ = 1;
    Phase phase_ = Phase::mission;
    std::size_t k_ = 0;
    std::size_t cycles_ = 0;
    std::uint64_t level_sum_ = 0;
    std::size_t visits_ = 0;
    std::optional<std::size_t> j_;
    std::uint64_t time_ = 0;

    std::uint64_t total_levels_ = 0;
    std::size_t total_visits_ = 0;
    std::size_t accepting_visits_ = 0;
    std::vector<RoundStats> completed_;
    std::vector<std::string> warnings_;
};

/// What a controller may look at when choosing the next state.
struct StepContext
{
    StateIndex current;
    std::uint64_t time;
    const PenaltyState& penalties;
    const RoundTracker& rounds;
};

/// The round-based offline strategy: the mission strategy in phase 1, the
/// cycle strategy in phase 2.
class OfflineController
{
public:
    explicit OfflineController(const OfflinePlan& plan) : plan_(plan) {}

    StateIndex choose(const StepContext& ctx)
    {
        if (ctx.rounds.phase() == Phase::mission) {
            position_.reset();
            return plan_.mission.next(ctx.current);
        }
        return plan_.cycle.next(ctx.current, position_);
    }

    void on_arrive(StateIndex, const RoundTracker::Arrival&) {}
    [[nodiscard]] std::size_t candidates_evaluated() const { return 0; }

private:
    const OfflinePlan& plan_;
    std::optional<std::size_t> position_;
};

} // namespace appc
