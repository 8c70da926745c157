#pragma once

// Step semantics shared by the tracer and the graph validator.
//
// A position is a frontier node plus the set of unordered-group links already
// consumed. From a position the learner may take
//   - any Correct/Suboptimal link leaving the frontier (grouped links only once), or
//   - any unconsumed member of an active group, out of order.
// A group is active when one of its unconsumed members leaves the frontier, or
// when it is partially consumed. An out-of-order step leaves the frontier in
// place; afterwards consumed group links leaving the frontier are followed
// automatically, so finishing a group lands on the node after its last link.

#include <algorithm>
#include <string>
#include <vector>

#include "gatutor/graph_types.hpp"

namespace gatutor::walk {

struct Position {
    std::string frontier;
    std::vector<std::string> consumed;  // sorted link ids

    bool has_consumed(const std::string& link_id) const {
        return std::binary_search(consumed.begin(), consumed.end(), link_id);
    }

    friend bool operator==(const Position&, const Position&) = default;
    friend auto operator<=>(const Position&, const Position&) = default;
};

inline Position initial(const BehaviorGraph& g) { return {g.start_node, {}}; }

inline bool group_active(const BehaviorGraph& g, const Position& pos, std::size_t group) {
    const auto& members = g.unordered_groups[group];
    bool any_consumed = false, all_consumed = true;
    for (const auto& m : members) {
        if (pos.has_consumed(m)) {
            any_consumed = true;
            continue;
        }
        all_consumed = false;
        const GraphLink* l = g.find_link(m);
        if (l && l->source == pos.frontier) return true;
    }
    return any_consumed && !all_consumed;
}

/// Advancing links the learner may take next, in document order.
inline std::vector<const GraphLink*> candidates(const BehaviorGraph& g, const Position& pos) {
    std::vector<bool> active(g.unordered_groups.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = group_active(g, pos, i);

    std::vector<const GraphLink*> out;
    for (const auto& l : g.links) {
        if (!advances(l.evaluation)) continue;
        auto group = g.group_of(l.id);
        if (!group) {
            if (l.source == pos.frontier) out.push_back(&l);
            continue;
        }
        if (pos.has_consumed(l.id)) continue;
        if (l.source == pos.frontier || active[*group]) out.push_back(&l);
    }
    return out;
}

inline Position step(const BehaviorGraph& g, const Position& pos, const GraphLink& link) {
    Position next = pos;
    if (link.source == pos.frontier) next.frontier = link.target;
    if (g.group_of(link.id)) {
        next.consumed.insert(std::upper_bound(next.consumed.begin(), next.consumed.end(), link.id), link.id);
    }
    std::vector<std::string> followed;
    for (;;) {
        const GraphLink* hop = nullptr;
        for (const auto& id : next.consumed) {
            const GraphLink* l = g.find_link(id);
            if (!l || l->source != next.frontier) continue;
            if (std::find(followed.begin(), followed.end(), id) != followed.end()) continue;
            if (!hop || l->document_order < hop->document_order) hop = l;
        }
        if (!hop) break;
        followed.push_back(hop->id);
        next.frontier = hop->target;
    }
    return next;
}

/// Correct links still open at the frontier.
inline std::vector<const GraphLink*> open_correct_links(const BehaviorGraph& g, const Position& pos) {
    std::vector<const GraphLink*> out;
    for (const auto& l : g.links) {
        if (l.source != pos.frontier || l.evaluation != Evaluation::Correct) continue;
        if (g.group_of(l.id) && pos.has_consumed(l.id)) continue;
        out.push_back(&l);
    }
    return out;
}

inline bool is_terminal(const BehaviorGraph& g, const Position& pos) {
    return open_correct_links(g, pos).empty();
}

}  // namespace gatutor::walk
