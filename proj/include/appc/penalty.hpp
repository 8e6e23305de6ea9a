#pragma once

#include "appc/error.hpp"
#include "appc/graph.hpp"
#include "appc/rational.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace appc {

/// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded generator with platform-independent derived draws. The standard
/// distributions are implementation-defined, so they are not used.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n), n >= 1, by rejection.
    std::uint64_t uniform_below(std::uint64_t n)
    {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t x = engine_();
            if (x >= threshold)
                return x % n;
        }
    }

    /// True with probability num/den.
    bool bernoulli(std::uint64_t num, std::uint64_t den) { return uniform_below(den) < num; }

private:
    std::mt19937_64 engine_;
};

/// Penalty level i stands for the value i/r.
using Level = unsigned;

/// Per-state penalty processes sharing a rate r; p(s) is the probability a
/// penalty at 1 stays at 1 for the next time unit.
class PenaltyField
{
public:
    static PenaltyField create(unsigned rate, std::vector<Rational> prob)
    {
        if (rate < 1)
            throw ValidationError("penalty rate must be >= 1");
        PenaltyField f;
        f.rate_ = rate;
        f.prob_ = std::move(prob);
        for (std::size_t s = 0; s < f.prob_.size(); ++s) {
            const Rational& p = f.prob_[s];
            if (p <= 0 || p > 1)
                throw ValidationError("penalty probability of state #" + std::to_string(s) + " is " + p.get_str() +
                                      "; must lie in (0, 1]");
            if (!p.get_num().fits_ulong_p() || !p.get_den().fits_ulong_p())
                throw ValidationError("penalty probability " + p.get_str() + " has too large a denominator");
        }
        return f;
    }

    [[nodiscard]] unsigned rate() const { return rate_; }
    [[nodiscard]] const Rational& prob(StateIndex s) const { return prob_[s]; }
    [[nodiscard]] const std::vector<Rational>& probs() const { return prob_; }
    [[nodiscard]] std::size_t size() const { return prob_.size(); }
    [[nodiscard]] Rational level_value(Level level) const { return make_rational(level, rate_); }

private:
    PenaltyField() = default;

    unsigned rate_ = 1;
    std::vector<Rational> prob_;
};

struct PenaltyState
{
    std::vector<Level> levels;
    std::uint64_t clock = 0;

    friend bool operator==(const PenaltyState&, const PenaltyState&) = default;
};

/// Every level drawn independently and uniformly from {0, 1/r, ..., 1}.
inline PenaltyState init_penalties(const PenaltyField& field, Rng& rng)
{
    PenaltyState st;
    st.levels.resize(field.size());
    for (auto& level : st.levels)
        level = static_cast<Level>(rng.uniform_below(field.rate() + 1));
    return st;
}

inline PenaltyState init_penalties(const PenaltyField& field, std::uint64_t seed)
{
    Rng rng(seed);
    return init_penalties(field, rng);
}

inline bool stays_at_top(const PenaltyField& field, StateIndex s, Rng& rng)
{
    const Rational& p = field.prob(s);
    return rng.bernoulli(p.get_num().get_ui(), p.get_den().get_ui());
}

/// One time unit of the penalty dynamics; draws happen in state order and
/// only for states currently at 1.
inline void step_penalties(const PenaltyField& field, PenaltyState& st, Rng& rng)
{
    const Level top = field.rate();
    for (StateIndex s = 0; s < st.levels.size(); ++s) {
        Level& level = st.levels[s];
        if (level < top)
            ++level;
        else if (!stays_at_top(field, s, rng))
            level = 0;
    }
    ++st.clock;
}

/// Planning expectation (1 + p(s)) / 2.
inline Rational expected_penalty(const PenaltyField& field, StateIndex s)
{
    Rational e = (1 + field.prob(s)) / 2;
    e.canonicalize();
    return e;
}

/// Exact distribution over levels after `elapsed` steps from `observed`.
inline std::vector<Rational> level_distribution(const PenaltyField& field, StateIndex s, Level observed,
                                                std::uint64_t elapsed)
{
    const unsigned r = field.rate();
    const Rational& p = field.prob(s);
    const Rational drop = 1 - p;
    std::vector<Rational> dist(r + 1, 0), next(r + 1, 0);
    dist.at(observed) = 1;
    for (std::uint64_t t = 0; t < elapsed; ++t) {
        for (auto& x : next)
            x = 0;
        for (unsigned i = 0; i < r; ++i)
            next[i + 1] += dist[i];
        next[r] += dist[r] * p;
        next[0] += dist[r] * drop;
        std::swap(dist, next);
    }
    return dist;
}

/// E[g(s, t + elapsed) | g(s, t) = observed / r] by forward propagation.
inline Rational dp_expected_penalty(const PenaltyField& field, StateIndex s, Level observed, std::uint64_t elapsed)
{
    if (observed + elapsed <= field.rate())
        return make_rational(static_cast<long>(observed + elapsed), field.rate());
    auto dist = level_distribution(field, s, observed, elapsed);
    Rational e = 0;
    for (unsigned i = 1; i < dist.size(); ++i)
        e += dist[i] * i;
    e /= field.rate();
    e.canonicalize();
    return e;
}

namespace detail {

inline Rational rational_pow(const Rational& base, unsigned long exp)
{
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exp);
    mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exp);
    Rational q(num, den);
    q.canonicalize();
    return q;
}

/// Probability of going from level 1 back to level 1 in exactly `steps` time
/// units, grouped as stays (p each) and full drop-and-climb excursions of
/// r + 1 units ((1 - p) each): the sum over excursion counts of
/// C(stays + excursions, excursions) (1-p)^excursions p^stays.
inline Rational top_return_probability(long steps, unsigned r, const Rational& p)
{
    if (steps < 0)
        return 0;
    const long period = static_cast<long>(r) + 1;
    const long z1 = steps / period;
    const long z2 = steps % period;
    const Rational drop = 1 - p;
    Rational total = 0;
    for (long y = 0; y <= z1; ++y) {
        const long excursions = z1 - y;
        const long stays = z2 + y * period;
        mpz_class choose;
        mpz_bin_uiui(choose.get_mpz_t(), static_cast<unsigned long>(excursions + stays),
                     static_cast<unsigned long>(excursions));
        total += Rational(choose) * rational_pow(drop, static_cast<unsigned long>(excursions)) *
                 rational_pow(p, static_cast<unsigned long>(stays));
    }
    return total;
}

} // namespace detail

/// Closed-form expected penalty after `elapsed` steps from `observed`, using
/// the combinatorial expressions pst(x/r) and pst(1).
inline Rational table_expected_penalty(const PenaltyField& field, StateIndex s, Level observed, std::uint64_t elapsed)
{
    const unsigned r = field.rate();
    if (observed + elapsed <= r)
        return make_rational(static_cast<long>(observed + elapsed), r);
    const Rational& p = field.prob(s);
    const Rational drop = 1 - p;
    const long w = static_cast<long>(elapsed);
    const long climb = static_cast<long>(r - observed);

    Rational total = 0;
    for (unsigned x = 0; x <= r; ++x) {
        long z = w - climb - static_cast<long>(x) - 1;
        if (z < 0)
            continue;
        total += detail::top_return_probability(z, r, p) * drop * make_rational(x, r);
    }
    long z = w - climb - 1;
    if (z >= 0)
        total += detail::top_return_probability(z, r, p) * p;
    total.canonicalize();
    return total;
}

enum class PenaltyBackend { dp, table };

/// Simulated expected penalty of a state visited `elapsed` units from now:
/// the observed value propagated forward when the state is visible and the
/// visit is within the horizon, the planning expectation otherwise.
inline Rational simulated_expected_penalty(const PenaltyField& field, StateIndex s, Level observed,
                                           std::uint64_t elapsed, bool visible, std::uint64_t horizon,
                                           PenaltyBackend backend = PenaltyBackend::dp)
{
    if (!visible || elapsed > horizon)
        return expected_penalty(field, s);
    if (observed + elapsed <= field.rate())
        return make_rational(static_cast<long>(observed + elapsed), field.rate());
    return backend == PenaltyBackend::dp ? dp_expected_penalty(field, s, observed, elapsed)
                                         : table_expected_penalty(field, s, observed, elapsed);
}

/// Precomputed forecasts value(s, level, elapsed) for elapsed in [0, horizon].
class PenaltyForecast
{
public:
    PenaltyForecast(const PenaltyField& field, std::uint64_t horizon, PenaltyBackend backend)
        : rate_(field.rate()), horizon_(horizon)
    {
        const std::size_t per_state = static_cast<std::size_t>(rate_ + 1) * (horizon_ + 1);
        table_.reserve(field.size() * per_state);
        expected_.reserve(field.size());
        for (StateIndex s = 0; s < field.size(); ++s) {
            expected_.push_back(expected_penalty(field, s));
            for (Level level = 0; level <= rate_; ++level)
                for (std::uint64_t e = 0; e <= horizon_; ++e)
                    table_.push_back(simulated_expected_penalty(field, s, level, e, true, horizon_, backend));
        }
    }

    [[nodiscard]] const Rational& visible(StateIndex s, Level level, std::uint64_t elapsed) const
    {
        return table_[(static_cast<std::size_t>(s) * (rate_ + 1) + level) * (horizon_ + 1) + elapsed];
    }
    [[nodiscard]] const Rational& expected(StateIndex s) const { return expected_[s]; }
    [[nodiscard]] std::uint64_t horizon() const { return horizon_; }

private:
    unsigned rate_;
    std::uint64_t horizon_;
    std::vector<Rational> table_;
    std::vector<Rational> expected_;
};

} // namespace appc
