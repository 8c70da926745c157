#pragma once

// Example tracing: matches learner transactions against a behavior graph
// while keeping every interpretation of the learner's path that is still
// consistent with what they have done.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gatutor/behavior_graph.hpp"
#include "gatutor/walk.hpp"

namespace gatutor {

inline constexpr std::string_view kGenericIncorrectMessage = "That step doesn't match. Try HINT.";
inline constexpr std::string_view kSuboptimalMessage = "That works, but it is not the preferred step here.";
inline constexpr std::string_view kAlreadyCompleteMessage = "This problem is already complete.";

struct Transaction {
    std::string selection;
    std::string action;
    std::string input;
    std::int64_t timestamp = 0;  // milliseconds since epoch

    friend bool operator==(const Transaction&, const Transaction&) = default;
};

struct Interpretation {
    std::vector<std::string> path;  // link ids in the order they were matched
    walk::Position at;

    const std::string& frontier() const { return at.frontier; }

    friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

enum class VerdictKind { Correct, Incorrect };

inline std::string_view to_string(VerdictKind k) { return k == VerdictKind::Correct ? "Correct" : "Incorrect"; }

struct Verdict {
    VerdictKind kind = VerdictKind::Incorrect;
    std::optional<std::string> message;
    std::vector<std::string> matched_links;  // document order
    // Link the tutor expected next; set on unmatched (generic) Incorrect verdicts.
    std::optional<std::string> expected_link;

    bool correct() const { return kind == VerdictKind::Correct; }

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct HintResponse {
    std::string target_link;
    std::size_t level = 0;
    std::string message;
    bool is_bottom_out = false;

    friend bool operator==(const HintResponse&, const HintResponse&) = default;
};

enum class TraceErrc { InvalidGraph, AlreadyDone };

class TraceError : public std::runtime_error {
public:
    TraceError(TraceErrc kind, const std::string& what, std::vector<Diagnostic> diagnostics = {})
        : std::runtime_error(what), kind_(kind), diagnostics_(std::move(diagnostics)) {}

    TraceErrc kind() const noexcept { return kind_; }
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
    TraceErrc kind_;
    std::vector<Diagnostic> diagnostics_;
};

/// A learner's progress through one graph. A value: operations return new
/// states and never modify their argument.
struct TraceState {
    std::shared_ptr<const BehaviorGraph> graph;
    std::vector<Interpretation> interpretations;
    std::vector<std::pair<Transaction, Verdict>> history;
    std::map<std::string, std::size_t> hint_level;

    std::size_t hint_level_of(const std::string& link_id) const {
        auto it = hint_level.find(link_id);
        return it == hint_level.end() ? 0 : it->second;
    }

    friend bool operator==(const TraceState& a, const TraceState& b) {
        return *a.graph == *b.graph && a.interpretations == b.interpretations && a.history == b.history &&
               a.hint_level == b.hint_level;
    }
};

inline bool is_done(const TraceState& state) {
    const BehaviorGraph& g = *state.graph;
    return std::any_of(state.interpretations.begin(), state.interpretations.end(),
                       [&](const Interpretation& i) { return walk::is_terminal(g, i.at); });
}

inline TraceState start_trace(std::shared_ptr<const BehaviorGraph> graph) {
    auto diags = validate_graph(*graph);
    if (has_errors(diags)) {
        std::string what = "graph '" + graph->id + "' failed validation:";
        for (const auto& d : diags)
            if (d.severity() == Severity::Error) what += " " + std::string(to_string(d.kind)) + "(" + d.subject + ")";
        throw TraceError(TraceErrc::InvalidGraph, what, std::move(diags));
    }
    TraceState s;
    s.graph = std::move(graph);
    s.interpretations.push_back({{}, walk::initial(*s.graph)});
    return s;
}

namespace detail {

inline void order_interpretations(const BehaviorGraph& g, std::vector<Interpretation>& v) {
    std::stable_sort(v.begin(), v.end(), [&](const Interpretation& a, const Interpretation& b) {
        auto ra = g.node_rank(a.frontier()), rb = g.node_rank(b.frontier());
        if (ra != rb) return ra < rb;
        return a.at.consumed < b.at.consumed;
    });
}

inline const GraphLink* lowest_order(const std::vector<const GraphLink*>& links) {
    const GraphLink* best = nullptr;
    for (const auto* l : links)
        if (!best || l->document_order < best->document_order) best = l;
    return best;
}

inline std::vector<std::string> ids_in_order(std::vector<const GraphLink*> links) {
    std::sort(links.begin(), links.end(),
              [](const GraphLink* a, const GraphLink* b) { return a->document_order < b->document_order; });
    links.erase(std::unique(links.begin(), links.end()), links.end());
    std::vector<std::string> out;
    for (const auto* l : links) out.push_back(l->id);
    return out;
}

}  // namespace detail

/// The Correct link the next hint would address, if the trace is not done.
inline const GraphLink* hint_target(const TraceState& state) {
    if (state.interpretations.empty() || is_done(state)) return nullptr;
    const BehaviorGraph& g = *state.graph;
    // Interpretations are kept ordered by frontier file order.
    return detail::lowest_order(walk::open_correct_links(g, state.interpretations.front().at));
}

inline std::pair<TraceState, Verdict> trace(const TraceState& state, const Transaction& txn) {
    const BehaviorGraph& g = *state.graph;
    TraceState next = state;
    Verdict verdict;

    auto accepts = [&](const GraphLink& l) { return l.matcher.accepts(txn.selection, txn.action, txn.input); };

    if (is_done(state)) {
        verdict.message = std::string(kAlreadyCompleteMessage);
        next.history.emplace_back(txn, verdict);
        return {std::move(next), std::move(verdict)};
    }

    std::vector<Interpretation> extended;
    std::set<walk::Position> seen;
    std::vector<const GraphLink*> matched;
    for (const auto& interp : state.interpretations) {
        for (const GraphLink* l : walk::candidates(g, interp.at)) {
            if (!accepts(*l)) continue;
            matched.push_back(l);
            walk::Position pos = walk::step(g, interp.at, *l);
            if (!seen.insert(pos).second) continue;
            Interpretation e{interp.path, std::move(pos)};
            e.path.push_back(l->id);
            extended.push_back(std::move(e));
        }
    }

    if (!matched.empty()) {
        detail::order_interpretations(g, extended);
        if (extended.size() > kMaxInterpretations) extended.resize(kMaxInterpretations);
        next.interpretations = std::move(extended);
        verdict.kind = VerdictKind::Correct;
        const GraphLink* first = detail::lowest_order(matched);
        if (first->evaluation == Evaluation::Suboptimal)
            verdict.message = first->buggy_message.value_or(std::string(kSuboptimalMessage));
        verdict.matched_links = detail::ids_in_order(std::move(matched));
    } else {
        std::vector<const GraphLink*> buggy;
        for (const auto& l : g.links) {
            if (l.evaluation != Evaluation::Incorrect || !accepts(l)) continue;
            bool at_frontier = std::any_of(state.interpretations.begin(), state.interpretations.end(),
                                           [&](const Interpretation& i) { return i.frontier() == l.source; });
            if (at_frontier) buggy.push_back(&l);
        }
        if (!buggy.empty()) {
            const GraphLink* first = detail::lowest_order(buggy);
            verdict.message = first->buggy_message.value_or(std::string(kGenericIncorrectMessage));
            verdict.matched_links = detail::ids_in_order(std::move(buggy));
        } else {
            verdict.message = std::string(kGenericIncorrectMessage);
            if (const GraphLink* expected = hint_target(state)) verdict.expected_link = expected->id;
        }
    }
    next.history.emplace_back(txn, verdict);
    return {std::move(next), std::move(verdict)};
}

/// Returns the next hint; repeated requests escalate along the target link's
/// hint chain and then stay on its last (bottom-out) hint.
inline std::pair<TraceState, HintResponse> request_hint(const TraceState& state) {
    const GraphLink* target = hint_target(state);
    if (!target) throw TraceError(TraceErrc::AlreadyDone, "the problem is already complete");
    if (target->hints.empty()) throw std::logic_error("link '" + target->id + "' has no hints");

    TraceState next = state;
    std::size_t level = std::min(state.hint_level_of(target->id), target->hints.size() - 1);
    HintResponse h{target->id, level, target->hints[level], level + 1 == target->hints.size()};
    next.hint_level[target->id] = std::min(level + 1, target->hints.size() - 1);
    return {std::move(next), std::move(h)};
}

inline std::vector<Verdict> replay(std::shared_ptr<const BehaviorGraph> graph, const std::vector<Transaction>& txns) {
    TraceState state = start_trace(std::move(graph));
    std::vector<Verdict> out;
    out.reserve(txns.size());
    for (const auto& t : txns) {
        auto [s, v] = trace(state, t);
        state = std::move(s);
        out.push_back(std::move(v));
    }
    return out;
}

}  // namespace gatutor
