#pragma once

#include "appc/error.hpp"
#include "appc/penalty.hpp"
#include "appc/transition_system.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace appc {

struct Cell
{
    int row = 0;
    int col = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// "rRRcCC"; the zero padding keeps row-major order equal to id order.
inline std::string cell_id(Cell c)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%02dc%02d", c.row, c.col);
    return buf;
}

struct GridSpec
{
    int width = 0;
    int height = 0;
    Cell stock_a;
    Cell stock_b;
    Cell base;
    std::set<Cell> unsafe;
    unsigned rate = 5;
    std::map<Cell, Rational> prob; // cells not listed use default_prob
    Rational default_prob = make_rational(1, 2);
};

struct GridWorld
{
    TransitionSystem ts;
    PenaltyField penalty;
};

/// 8-connected grid; straight moves weigh 2 and diagonal moves 3. The stocks
/// carry a and b and the surveillance proposition, the base carries c and is
/// the initial state, unsafe cells carry u.
inline GridWorld generate_grid(const GridSpec& g)
{
    if (g.width < 1 || g.height < 1)
        throw ValidationError("grid dimensions must be positive");
    if (g.width > 100 || g.height > 100)
        throw ValidationError("grid dimensions must be at most 100");
    if (g.width * g.height < 2)
        throw ValidationError("grid needs at least two cells");
    auto inside = [&](Cell c) { return c.row >= 0 && c.row < g.height && c.col >= 0 && c.col < g.width; };
    for (Cell c : {g.stock_a, g.stock_b, g.base})
        if (!inside(c))
            throw ValidationError("cell " + cell_id(c) + " lies outside the grid");
    if (g.stock_a == g.stock_b)
        throw ValidationError("the two stocks must be distinct cells");
    for (Cell c : g.unsafe) {
        if (!inside(c))
            throw ValidationError("unsafe cell " + cell_id(c) + " lies outside the grid");
        if (c == g.stock_a || c == g.stock_b || c == g.base)
            throw ValidationError("unsafe cell " + cell_id(c) + " coincides with a stock or the base");
    }
    for (const auto& [c, _] : g.prob)
        if (!inside(c))
            throw ValidationError("probability given for " + cell_id(c) + " outside the grid");

    TransitionSystemSpec spec;
    spec.ap = {"a", "b", "c", "u", std::string(default_surveillance_prop)};
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) {
            const Cell cell{r, c};
            const std::string id = cell_id(cell);
            spec.states.push_back(id);
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc) {
                    const Cell to{r + dr, c + dc};
                    if ((dr == 0 && dc == 0) || !inside(to))
                        continue;
                    spec.transitions.emplace_back(id, cell_id(to), dr != 0 && dc != 0 ? 3 : 2);
                }
        }
    spec.labels[cell_id(g.stock_a)] = {"a", default_surveillance_prop};
    spec.labels[cell_id(g.stock_b)] = {"b", default_surveillance_prop};
    spec.labels[cell_id(g.base)].insert("c");
    for (Cell c : g.unsafe)
        spec.labels[cell_id(c)].insert("u");
    spec.initial = cell_id(g.base);
    TransitionSystem ts = TransitionSystem::create(spec);

    std::vector<Rational> prob(ts.size(), g.default_prob);
    for (const auto& [c, p] : g.prob)
        prob[*ts.index_of(cell_id(c))] = p;
    PenaltyField field = PenaltyField::create(g.rate, std::move(prob));
    return GridWorld{std::move(ts), std::move(field)};
}

inline constexpr const char* case_study_formula =
    "G (a -> X (!a U b)) & G (b -> X (!b U a)) & G F c & G !u & G F pi_sur";

/// Package transport between two stocks with a base and a band of unsafe
/// cells. The probability map is synthetic: high near a hot spot in the
/// middle of the grid, falling off linearly to 0.1, in hundredths.
inline GridSpec case_study_grid_spec()
{
    GridSpec g;
    g.width = 10;
    g.height = 8;
    g.stock_a = {1, 1};
    g.stock_b = {1, 8};
    g.base = {6, 4};
    g.unsafe = {{3, 3}, {3, 4}, {3, 5}, {4, 5}, {5, 8}, {6, 8}};
    g.rate = 5;
    // p = 0.9 - 0.16 * (distance to the hot spot at row 3.5, col 5), at least
    // 0.1. Rounded to hundredths in integer arithmetic so every platform
    // builds the same map.
    for (int r = 0; r < g.height; ++r)
        for (int c = 0; c < g.width; ++c) {
            const long dr = 2 * r - 7, dc = 2 * c - 10;
            const long n = 64 * (dr * dr + dc * dc); // (16 d)^2
            long k = static_cast<long>(std::sqrt(static_cast<double>(n)));
            while (k * k > n)
                --k;
            while ((k + 1) * (k + 1) <= n)
                ++k;
            if (n > k * k + k)
                ++k; // round to nearest
            g.prob[{r, c}] = make_rational(std::max(10L, 90 - k), 100);
        }
    return g;
}

inline GridWorld case_study_grid() { return generate_grid(case_study_grid_spec()); }

} // namespace appc
