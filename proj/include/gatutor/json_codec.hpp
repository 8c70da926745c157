#pragma once

// JSON encodings shared by the HTTP API, the on-disk session logs and the
// line-delimited transaction log format. Field names are frozen in docs/api.md.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatutor/example_tracer.hpp"
#include "gatutor/knowledge_tracer.hpp"

namespace gatutor {

using nlohmann::json;

inline json to_json(const Transaction& t) {
    return {{"selection", t.selection}, {"action", t.action}, {"input", t.input}, {"timestamp", t.timestamp}};
}

/// Throws std::invalid_argument on a missing or mistyped field.
inline Transaction transaction_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("transaction must be an object");
    auto text = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required) throw std::invalid_argument(std::string("missing field '") + key + "'");
            return {};
        }
        if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
        return it->get<std::string>();
    };
    Transaction t;
    t.selection = text("selection", true);
    t.action = text("action", true);
    t.input = text("input", false);
    if (t.selection.empty() || t.action.empty()) throw std::invalid_argument("selection and action must be non-empty");
    if (auto it = j.find("timestamp"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer()) throw std::invalid_argument("field 'timestamp' must be an integer");
        t.timestamp = it->get<std::int64_t>();
    }
    return t;
}

inline json to_json(const Verdict& v) {
    json j{{"kind", std::string(to_string(v.kind))}, {"matched_links", v.matched_links}};
    j["message"] = v.message ? json(*v.message) : json(nullptr);
    j["expected_link"] = v.expected_link ? json(*v.expected_link) : json(nullptr);
    return j;
}

inline json to_json(const HintResponse& h) {
    return {{"target_link", h.target_link}, {"level", h.level}, {"message", h.message}, {"is_bottom_out", h.is_bottom_out}};
}

inline json to_json(const SkillMastery& m) {
    json arr = json::array();
    for (const auto& [name, e] : m.entries)
        arr.push_back({{"skill", name}, {"p_know", e.p_know}, {"opportunities", e.opportunities}, {"mastered", e.p_know >= kMasteryThreshold}});
    return arr;
}

inline json to_json(const TraceState& s) {
    json interps = json::array();
    for (const auto& i : s.interpretations)
        interps.push_back({{"frontier", i.frontier()}, {"path", i.path}, {"consumed", i.at.consumed}});
    json history = json::array();
    for (const auto& [t, v] : s.history) history.push_back({{"transaction", to_json(t)}, {"verdict", to_json(v)}});
    json levels = json::object();
    for (const auto& [link, level] : s.hint_level) levels[link] = level;
    return {{"interpretations", interps}, {"history", history}, {"hint_levels", levels}, {"done", is_done(s)}};
}

// ---------------------------------------------------------------------------
// Line-delimited transaction logs: one JSON object per line.

inline void write_transaction_line(std::ostream& out, const Transaction& t) { out << to_json(t).dump() << '\n'; }

/// Reads a transaction log; blank lines are skipped. Errors name the line.
inline std::vector<Transaction> read_transaction_log(std::istream& in) {
    std::vector<Transaction> out;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(transaction_from_json(json::parse(line)));
        } catch (const std::exception& e) {
            throw std::invalid_argument("transaction log line " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace gatutor
