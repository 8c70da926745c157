#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gatutor {

enum class Evaluation { Correct, Incorrect, Suboptimal };

inline std::string_view to_string(Evaluation e) {
    switch (e) {
        case Evaluation::Correct: return "correct";
        case Evaluation::Incorrect: return "incorrect";
        case Evaluation::Suboptimal: return "suboptimal";
    }
    return "correct";
}

inline bool advances(Evaluation e) { return e != Evaluation::Incorrect; }

// `*` matches any run of characters (including none), `?` exactly one.
inline bool wildcard_match(std::string_view pattern, std::string_view text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string_view::npos, resume = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            resume = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++resume;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

class MatchPattern {
public:
    enum class Kind { Exact, Wildcard, Regex };

    MatchPattern() = default;

    // Throws std::regex_error when a Regex pattern does not compile.
    MatchPattern(Kind kind, std::string pattern) : kind_(kind), pattern_(std::move(pattern)) {
        if (kind_ == Kind::Regex)
            regex_ = std::make_shared<const std::regex>(pattern_, std::regex::ECMAScript);
    }

    static MatchPattern exact(std::string s) { return {Kind::Exact, std::move(s)}; }
    static MatchPattern wildcard(std::string s) { return {Kind::Wildcard, std::move(s)}; }
    static MatchPattern regex(std::string s) { return {Kind::Regex, std::move(s)}; }

    Kind kind() const noexcept { return kind_; }
    const std::string& pattern() const noexcept { return pattern_; }

    bool accepts(std::string_view input) const {
        switch (kind_) {
            case Kind::Exact: return input == pattern_;
            case Kind::Wildcard: return wildcard_match(pattern_, input);
            case Kind::Regex: return std::regex_match(input.begin(), input.end(), *regex_);
        }
        return false;
    }

    friend bool operator==(const MatchPattern& a, const MatchPattern& b) {
        return a.kind_ == b.kind_ && a.pattern_ == b.pattern_;
    }

private:
    Kind kind_ = Kind::Exact;
    std::string pattern_;
    std::shared_ptr<const std::regex> regex_;
};

inline std::string_view to_string(MatchPattern::Kind k) {
    switch (k) {
        case MatchPattern::Kind::Exact: return "exact";
        case MatchPattern::Kind::Wildcard: return "wildcard";
        case MatchPattern::Kind::Regex: return "regex";
    }
    return "exact";
}

struct StepMatcher {
    std::string selection;
    std::string action;
    MatchPattern input;

    bool accepts(std::string_view sel, std::string_view act, std::string_view in) const {
        return sel == selection && act == action && input.accepts(in);
    }

    friend bool operator==(const StepMatcher&, const StepMatcher&) = default;
};

struct GraphNode {
    std::string id;
    std::string label;

    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphLink {
    std::string id;
    std::string source;
    std::string target;
    StepMatcher matcher;
    Evaluation evaluation = Evaluation::Correct;
    std::vector<std::string> hints;  // general to specific; last one is the bottom-out hint
    std::optional<std::string> buggy_message;
    std::vector<std::string> skills;
    std::size_t document_order = 0;

    friend bool operator==(const GraphLink&, const GraphLink&) = default;
};

struct SkillParams {
    double p_init = 0.25;
    double p_transit = 0.2;
    double p_slip = 0.1;
    double p_guess = 0.2;

    friend bool operator==(const SkillParams&, const SkillParams&) = default;
};

struct SkillDef {
    std::string name;
    std::string label;
    SkillParams params;

    friend bool operator==(const SkillDef&, const SkillDef&) = default;
};

/// An authored tutoring problem. Immutable once parsed; share it through
/// `std::shared_ptr<const BehaviorGraph>`.
struct BehaviorGraph {
    std::string id;
    std::string title;
    std::string start_node;
    std::vector<GraphNode> nodes;
    std::vector<GraphLink> links;  // document order
    std::vector<SkillDef> skills;
    std::vector<std::vector<std::string>> unordered_groups;

    const GraphNode* find_node(std::string_view node_id) const {
        for (const auto& n : nodes)
            if (n.id == node_id) return &n;
        return nullptr;
    }

    const GraphLink* find_link(std::string_view link_id) const {
        for (const auto& l : links)
            if (l.id == link_id) return &l;
        return nullptr;
    }

    const SkillDef* find_skill(std::string_view name) const {
        for (const auto& s : skills)
            if (s.name == name) return &s;
        return nullptr;
    }

    // Position of the node in file order; nodes.size() when absent.
    std::size_t node_rank(std::string_view node_id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == node_id) return i;
        return nodes.size();
    }

    // Index into unordered_groups, or nullopt for ungrouped links.
    std::optional<std::size_t> group_of(std::string_view link_id) const {
        for (std::size_t g = 0; g < unordered_groups.size(); ++g) {
            const auto& members = unordered_groups[g];
            if (std::find(members.begin(), members.end(), link_id) != members.end()) return g;
        }
        return std::nullopt;
    }

    std::vector<const GraphLink*> outgoing(std::string_view node_id) const {
        std::vector<const GraphLink*> out;
        for (const auto& l : links)
            if (l.source == node_id) out.push_back(&l);
        return out;
    }

    std::size_t correct_link_count() const {
        return static_cast<std::size_t>(std::count_if(links.begin(), links.end(), [](const GraphLink& l) {
            return l.evaluation == Evaluation::Correct;
        }));
    }

    friend bool operator==(const BehaviorGraph&, const BehaviorGraph&) = default;
};

}  // namespace gatutor
