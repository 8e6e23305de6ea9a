#pragma once

#include "appc/error.hpp"
#include "appc/penalty.hpp"
#include "appc/rational.hpp"
#include "appc/transition_system.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

namespace appc {

/// A transition system together with its (optional) penalty section.
struct Model
{
    TransitionSystem ts;
    std::optional<PenaltyField> penalty;
};

inline constexpr int model_format_version = 1;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

inline Rational json_to_rational(const nlohmann::json& value, const std::string& where)
{
    try {
        if (value.is_string())
            return parse_rational(value.get<std::string>());
        if (value.is_number_integer())
            return Rational(value.get<long>());
        if (value.is_number_float()) {
            // Shortest round-trip text of the double is the literal the user wrote.
            char buf[64];
            auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value.get<double>());
            if (ec != std::errc{})
                throw std::invalid_argument("unprintable number");
            return parse_rational(std::string_view(buf, static_cast<std::size_t>(end - buf)));
        }
    } catch (const std::invalid_argument& e) {
        throw ParseError(where + ": " + e.what(), 0, 0);
    }
    throw ParseError(where + ": expected a number or a rational string", 0, 0);
}

inline nlohmann::json rational_to_json(const Rational& q)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, q.get_d());
    if (ec == std::errc{}) {
        std::string_view text(buf, static_cast<std::size_t>(end - buf));
        try {
            if (parse_rational(text) == q)
                return q.get_d();
        } catch (const std::invalid_argument&) {
        }
    }
    return q.get_str();
}

template <class T>
T require(const nlohmann::json& obj, const char* key)
{
    if (!obj.contains(key))
        throw ParseError(std::string("missing key '") + key + "'", 0, 0);
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("key '") + key + "': " + e.what(), 0, 0);
    }
}

} // namespace detail

/// Parses the JSON model document:
///   { "format_version": 1, "states": [...], "ap": [...], "labels": {id: [...]},
///     "transitions": [[src, dst, weight], ...], "initial": id,
///     "penalty": { "rate": r, "prob": { id: p } } }
/// `penalty` is optional. Unknown top-level keys are rejected.
inline Model parse_model(std::string_view text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, column] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        throw ParseError(std::string("malformed model file: ") + e.what(), line, column);
    }
    if (!doc.is_object())
        throw ParseError("model file must be a JSON object", 1, 1);

    static const std::set<std::string> known{"format_version", "states", "ap", "labels", "transitions", "initial",
                                             "penalty"};
    for (const auto& [key, _] : doc.items())
        if (!known.contains(key))
            throw ParseError("unknown top-level key '" + key + "'", 0, 0);
    if (doc.contains("format_version")) {
        if (!doc["format_version"].is_number_integer() || doc["format_version"].get<int>() != model_format_version)
            throw ParseError("unsupported format_version (expected 1)", 0, 0);
    }

    TransitionSystemSpec spec;
    spec.states = detail::require<std::vector<std::string>>(doc, "states");
    spec.ap = doc.contains("ap") ? detail::require<std::vector<std::string>>(doc, "ap") : std::vector<std::string>{};
    if (doc.contains("labels")) {
        if (!doc["labels"].is_object())
            throw ParseError("'labels' must be an object", 0, 0);
        for (const auto& [state, props] : doc["labels"].items()) {
            try {
                auto list = props.get<std::vector<std::string>>();
                spec.labels[state].insert(list.begin(), list.end());
            } catch (const nlohmann::json::exception&) {
                throw ParseError("labels of '" + state + "' must be a list of strings", 0, 0);
            }
        }
    }
    if (!doc.contains("transitions") || !doc["transitions"].is_array())
        throw ParseError("'transitions' must be a list of [src, dst, weight] triples", 0, 0);
    for (const auto& t : doc["transitions"]) {
        if (!t.is_array() || t.size() != 3 || !t[0].is_string() || !t[1].is_string() || !t[2].is_number_integer())
            throw ParseError("transition entries must be [src, dst, weight] with an integer weight: " + t.dump(), 0,
                             0);
        spec.transitions.emplace_back(t[0].get<std::string>(), t[1].get<std::string>(), t[2].get<long long>());
    }
    spec.initial = detail::require<std::string>(doc, "initial");

    Model model{TransitionSystem::create(spec), std::nullopt};

    if (doc.contains("penalty")) {
        const auto& pen = doc["penalty"];
        if (!pen.is_object())
            throw ParseError("'penalty' must be an object", 0, 0);
        for (const auto& [key, _] : pen.items())
            if (key != "rate" && key != "prob")
                throw ParseError("unknown penalty key '" + key + "'", 0, 0);
        long rate = detail::require<long>(pen, "rate");
        if (rate < 1)
            throw ValidationError("penalty rate must be >= 1");
        if (!pen.contains("prob") || !pen["prob"].is_object())
            throw ParseError("'penalty.prob' must map state ids to probabilities", 0, 0);
        std::vector<std::optional<Rational>> prob(model.ts.size());
        for (const auto& [state, value] : pen["prob"].items()) {
            auto s = model.ts.index_of(state);
            if (!s)
                throw ValidationError("penalty probability for unknown state '" + state + "'");
            prob[*s] = detail::json_to_rational(value, "penalty probability of " + state);
        }
        std::vector<Rational> dense;
        for (StateIndex s = 0; s < model.ts.size(); ++s) {
            if (!prob[s])
                throw ValidationError("state " + model.ts.id(s) + " has no penalty probability");
            if (*prob[s] <= 0)
                throw ValidationError("state " + model.ts.id(s) + " has penalty probability " + prob[s]->get_str() +
                                      "; zero is not allowed");
            dense.push_back(*prob[s]);
        }
        model.penalty = PenaltyField::create(static_cast<unsigned>(rate), std::move(dense));
    }
    return model;
}

inline Model load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open model file " + path.string(), 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

inline nlohmann::json model_to_json(const TransitionSystem& ts, const PenaltyField* penalty = nullptr)
{
    nlohmann::json out;
    out["format_version"] = model_format_version;
    out["states"] = ts.ids();
    out["ap"] = ts.ap();
    nlohmann::json labels = nlohmann::json::object();
    for (StateIndex s = 0; s < ts.size(); ++s)
        if (!ts.labels(s).empty())
            labels[ts.id(s)] = std::vector<std::string>(ts.labels(s).begin(), ts.labels(s).end());
    out["labels"] = labels;
    nlohmann::json transitions = nlohmann::json::array();
    for (StateIndex s = 0; s < ts.size(); ++s)
        for (const Edge& e : ts.successors(s))
            transitions.push_back({ts.id(s), ts.id(e.to), e.weight});
    out["transitions"] = transitions;
    out["initial"] = ts.id(ts.initial());
    if (penalty) {
        nlohmann::json prob = nlohmann::json::object();
        for (StateIndex s = 0; s < ts.size(); ++s)
            prob[ts.id(s)] = detail::rational_to_json(penalty->prob(s));
        out["penalty"] = {{"rate", penalty->rate()}, {"prob", prob}};
    }
    return out;
}

inline std::string dump_model(const Model& model)
{
    return model_to_json(model.ts, model.penalty ? &*model.penalty : nullptr).dump(1) + "\n";
}

} // namespace appc
