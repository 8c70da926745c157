#pragma once

// Field-by-field structural comparison of two behavior graphs. Returns an
// empty string when equal, otherwise a description of the first difference.

#include <string>

#include "gatutor/graph_types.hpp"

namespace gatutor::oracle {

inline std::string graph_difference(const BehaviorGraph& a, const BehaviorGraph& b) {
    if (a.id != b.id) return "id";
    if (a.title != b.title) return "title";
    if (a.start_node != b.start_node) return "start_node";
    if (a.nodes.size() != b.nodes.size()) return "node count";
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i].id != b.nodes[i].id) return "node " + std::to_string(i) + " id";
        if (a.nodes[i].label != b.nodes[i].label) return "node " + a.nodes[i].id + " label";
    }
    if (a.skills.size() != b.skills.size()) return "skill count";
    for (std::size_t i = 0; i < a.skills.size(); ++i) {
        const auto &x = a.skills[i], &y = b.skills[i];
        if (x.name != y.name || x.label != y.label) return "skill " + std::to_string(i);
        if (x.params.p_init != y.params.p_init || x.params.p_transit != y.params.p_transit ||
            x.params.p_slip != y.params.p_slip || x.params.p_guess != y.params.p_guess)
            return "skill " + x.name + " parameters";
    }
    if (a.links.size() != b.links.size()) return "link count";
    for (std::size_t i = 0; i < a.links.size(); ++i) {
        const auto &x = a.links[i], &y = b.links[i];
        std::string where = "link " + x.id + " ";
        if (x.id != y.id) return where + "id";
        if (x.source != y.source || x.target != y.target) return where + "endpoints";
        if (x.evaluation != y.evaluation) return where + "evaluation";
        if (x.matcher.selection != y.matcher.selection || x.matcher.action != y.matcher.action) return where + "matcher";
        if (x.matcher.input.kind() != y.matcher.input.kind() || x.matcher.input.pattern() != y.matcher.input.pattern())
            return where + "input pattern";
        if (x.hints.size() != y.hints.size()) return where + "hint count";
        for (std::size_t h = 0; h < x.hints.size(); ++h)
            if (x.hints[h] != y.hints[h]) return where + "hint " + std::to_string(h);
        if (x.buggy_message.has_value() != y.buggy_message.has_value() ||
            (x.buggy_message && *x.buggy_message != *y.buggy_message))
            return where + "buggy message";
        if (x.skills != y.skills) return where + "skills";
        if (x.document_order != y.document_order) return where + "document order";
    }
    if (a.unordered_groups.size() != b.unordered_groups.size()) return "group count";
    for (std::size_t i = 0; i < a.unordered_groups.size(); ++i)
        if (a.unordered_groups[i] != b.unordered_groups[i]) return "group " + std::to_string(i) + " members";
    return {};
}

}  // namespace gatutor::oracle
