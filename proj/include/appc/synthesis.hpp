#pragma once

#include "appc/buchi.hpp"
#include "appc/ltl.hpp"
#include "appc/mean_cycle.hpp"
#include "appc/penalty.hpp"
#include "appc/product.hpp"
#include "appc/transition_system.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace appc {

struct AsccResult
{
    Ascc ascc;
    ReducedSystem reduced;
    OptimalCycle cycle;
};

/// Everything the controllers need: the product, per-state planning costs,
/// and the minimum-APPC component with its witness cycle.
struct Synthesis
{
    Product product;
    PenaltyField penalty;
    std::string surveillance_prop;
    std::vector<bool> surveillance; // per product state
    std::vector<Rational> cost;     // planning expectation per product state
    std::vector<AsccResult> components;
    std::vector<Ascc> excluded;
    std::size_t chosen = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] const AsccResult& best() const { return components[chosen]; }
    [[nodiscard]] const Ascc& ascc() const { return best().ascc; }
    [[nodiscard]] const OptimalCycle& cycle() const { return best().cycle; }
    [[nodiscard]] const Rational& vstar() const { return best().cycle.appc_value; }
};

/// Product construction, accepting-component analysis, reduction and
/// minimum mean cycle for every candidate; the component with the smallest
/// value wins, ties going to the one with the smallest state.
inline Synthesis synthesize(const TransitionSystem& ts, const PenaltyField& penalty, const ltl::Formula& formula,
                            const std::string& surveillance_prop = default_surveillance_prop)
{
    if (penalty.size() != ts.size())
        throw ValidationError("penalty field does not cover the transition system");
    Product product = build_product(ts, to_buchi(formula));
    Synthesis syn{std::move(product), penalty, surveillance_prop, {}, {}, {}, {}, 0, {}};
    const Product& p = syn.product;
    for (const auto& atom : p.unknown_atoms())
        syn.warnings.push_back("formula atom '" + atom + "' labels no state of the model");

    syn.surveillance.resize(p.size());
    syn.cost.reserve(p.size());
    for (StateIndex v = 0; v < p.size(); ++v) {
        syn.surveillance[v] = p.labels(v).contains(surveillance_prop);
        syn.cost.push_back(expected_penalty(penalty, p.ts_state(v)));
    }

    AsccAnalysis analysis = accepting_sccs(p, surveillance_prop);
    for (const auto& u : analysis.excluded)
        syn.warnings.push_back("accepting SCC containing " + p.id(u.states.front()) + " (" +
                               std::to_string(u.states.size()) + " states) has no '" + surveillance_prop +
                               "' state and is skipped");
    syn.excluded = std::move(analysis.excluded);
    if (analysis.candidates.empty())
        throw UnsatisfiableError("no reachable accepting SCC with a '" + surveillance_prop + "' state");

    for (auto& u : analysis.candidates) {
        ReducedSystem red = reduce_ascc(p, u.states, syn.surveillance, syn.cost);
        OptimalCycle oc = optimal_cycle(red);
        syn.components.push_back(AsccResult{std::move(u), std::move(red), std::move(oc)});
    }
    for (std::size_t c = 1; c < syn.components.size(); ++c)
        if (syn.components[c].cycle.appc_value < syn.components[syn.chosen].cycle.appc_value)
            syn.chosen = c;
    return syn;
}

inline nlohmann::json reduced_to_json(const Synthesis& syn)
{
    const Product& p = syn.product;
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t c = 0; c < syn.components.size(); ++c) {
        const auto& comp = syn.components[c];
        nlohmann::json j;
        j["component"] = c;
        j["chosen"] = c == syn.chosen;
        j["size"] = comp.ascc.states.size();
        std::vector<std::string> states;
        for (StateIndex v : comp.reduced.states)
            states.push_back(p.id(v));
        j["states"] = states;
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : comp.reduced.edges) {
            std::vector<std::string> run;
            for (StateIndex v : e.run.states)
                run.push_back(p.id(v));
            edges.push_back({{"from", p.id(e.from)},
                             {"to", p.id(e.to)},
                             {"weight", to_string(e.weight)},
                             {"weight_decimal", to_decimal(e.weight)},
                             {"run", run}});
        }
        j["transitions"] = edges;
        j["appc"] = to_string(comp.cycle.appc_value);
        std::vector<std::string> cyc;
        for (StateIndex v : comp.cycle.cycle.states)
            cyc.push_back(p.id(v));
        j["cycle"] = cyc;
        out.push_back(j);
    }
    return out;
}

} // namespace appc
