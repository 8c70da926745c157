#pragma once

// Behavior-graph files (`.brd.xml`): parsing, serialization, authoring
// diagnostics and the skill matrix. The grammar is documented in
// docs/brd-schema.md.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gatutor/graph_types.hpp"
#include "gatutor/walk.hpp"
#include "gatutor/xml.hpp"

namespace gatutor {

/// Upper bound on simultaneous interpretations a graph may produce.
inline constexpr std::size_t kMaxInterpretations = 256;

enum class GraphErrc { MalformedXml, SchemaViolation, DanglingReference, DuplicateId, NoStartNode };

inline std::string_view to_string(GraphErrc e) {
    switch (e) {
        case GraphErrc::MalformedXml: return "MalformedXml";
        case GraphErrc::SchemaViolation: return "SchemaViolation";
        case GraphErrc::DanglingReference: return "DanglingReference";
        case GraphErrc::DuplicateId: return "DuplicateId";
        case GraphErrc::NoStartNode: return "NoStartNode";
    }
    return "SchemaViolation";
}

class GraphError : public std::runtime_error {
public:
    GraphError(GraphErrc kind, std::size_t line, std::string context, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + " at line " + std::to_string(line) +
                             (context.empty() ? "" : " (" + context + ")") + ": " + detail),
          kind_(kind), line_(line), context_(std::move(context)) {}

    GraphErrc kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }
    // Element description such as `<link id="l3">`.
    const std::string& context() const noexcept { return context_; }

private:
    GraphErrc kind_;
    std::size_t line_;
    std::string context_;
};

namespace detail {

inline std::string describe(const xml::Element& el) {
    std::string s = "<" + el.name;
    if (const auto* id = el.attribute("id")) s += " id=\"" + *id + "\"";
    else if (const auto* name = el.attribute("name")) s += " name=\"" + *name + "\"";
    return s + ">";
}

[[noreturn]] inline void raise(GraphErrc kind, const xml::Element& el, const std::string& detail) {
    throw GraphError(kind, el.line, describe(el), detail);
}

inline void check_attributes(const xml::Element& el, std::initializer_list<std::string_view> allowed) {
    for (const auto& a : el.attributes) {
        if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end())
            raise(GraphErrc::SchemaViolation, el, "unknown attribute '" + a.name + "'");
    }
}

inline const std::string& required(const xml::Element& el, std::string_view key) {
    const auto* v = el.attribute(key);
    if (!v) raise(GraphErrc::SchemaViolation, el, "missing attribute '" + std::string(key) + "'");
    if (v->empty()) raise(GraphErrc::SchemaViolation, el, "empty attribute '" + std::string(key) + "'");
    return *v;
}

inline std::string optional_attr(const xml::Element& el, std::string_view key, std::string fallback = {}) {
    const auto* v = el.attribute(key);
    return v ? *v : fallback;
}

inline void no_children(const xml::Element& el) {
    if (!el.children.empty())
        raise(GraphErrc::SchemaViolation, el.children.front(), "unexpected element inside <" + el.name + ">");
}

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline double probability(const xml::Element& el, std::string_view key, double fallback) {
    const auto* v = el.attribute(key);
    if (!v) return fallback;
    double x = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), x);
    if (ec != std::errc() || ptr != v->data() + v->size())
        raise(GraphErrc::SchemaViolation, el, "'" + std::string(key) + "' is not a number");
    if (!(x >= 0.0 && x <= 1.0))
        raise(GraphErrc::SchemaViolation, el, "'" + std::string(key) + "' outside [0,1]");
    return x;
}

inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

inline Evaluation parse_evaluation(const xml::Element& el) {
    std::string v = optional_attr(el, "evaluation", "correct");
    if (v == "correct") return Evaluation::Correct;
    if (v == "incorrect") return Evaluation::Incorrect;
    if (v == "suboptimal") return Evaluation::Suboptimal;
    raise(GraphErrc::SchemaViolation, el, "evaluation must be correct, incorrect or suboptimal");
}

inline StepMatcher parse_matcher(const xml::Element& el) {
    check_attributes(el, {"selection", "action", "input", "match"});
    no_children(el);
    StepMatcher m;
    m.selection = required(el, "selection");
    m.action = required(el, "action");
    std::string input = optional_attr(el, "input");
    std::string kind = optional_attr(el, "match", "exact");
    try {
        if (kind == "exact") m.input = MatchPattern::exact(input);
        else if (kind == "wildcard") m.input = MatchPattern::wildcard(input);
        else if (kind == "regex") m.input = MatchPattern::regex(input);
        else raise(GraphErrc::SchemaViolation, el, "match must be exact, wildcard or regex");
    } catch (const std::regex_error& e) {
        raise(GraphErrc::SchemaViolation, el, std::string("regex does not compile: ") + e.what());
    }
    return m;
}

inline GraphLink parse_link(const xml::Element& el, std::size_t order) {
    check_attributes(el, {"id", "source", "target", "evaluation", "message", "skills"});
    GraphLink link;
    link.id = required(el, "id");
    link.source = required(el, "source");
    link.target = required(el, "target");
    link.evaluation = parse_evaluation(el);
    if (const auto* msg = el.attribute("message")) link.buggy_message = *msg;
    link.skills = split_ws(optional_attr(el, "skills"));
    link.document_order = order;

    bool have_matcher = false;
    for (const auto& child : el.children) {
        if (child.name == "matcher") {
            if (have_matcher) raise(GraphErrc::SchemaViolation, child, "link has more than one matcher");
            link.matcher = parse_matcher(child);
            have_matcher = true;
        } else if (child.name == "hint") {
            check_attributes(child, {});
            no_children(child);
            std::string text = trim(child.text);
            if (text.empty()) raise(GraphErrc::SchemaViolation, child, "empty hint");
            link.hints.push_back(std::move(text));
        } else {
            raise(GraphErrc::SchemaViolation, child, "unknown element <" + child.name + "> in link");
        }
    }
    if (!have_matcher) raise(GraphErrc::SchemaViolation, el, "link has no matcher");
    if (!trim(el.text).empty()) raise(GraphErrc::SchemaViolation, el, "unexpected text in link");
    if (link.evaluation == Evaluation::Incorrect && link.target != link.source)
        raise(GraphErrc::SchemaViolation, el, "incorrect links must loop back to their source");
    return link;
}

}  // namespace detail

inline BehaviorGraph parse_graph(std::string_view xml_text) {
    using detail::raise;
    xml::Element root;
    try {
        root = xml::parse(xml_text);
    } catch (const xml::ParseError& e) {
        throw GraphError(GraphErrc::MalformedXml, e.line(), "", e.what());
    }
    if (root.name != "graph") raise(GraphErrc::SchemaViolation, root, "root element must be <graph>");
    detail::check_attributes(root, {"id", "title", "start"});

    BehaviorGraph g;
    g.id = detail::required(root, "id");
    g.title = detail::optional_attr(root, "title");
    const auto* start = root.attribute("start");
    if (!start || start->empty()) throw GraphError(GraphErrc::NoStartNode, root.line, "<graph>", "no start node");
    g.start_node = *start;

    std::vector<const xml::Element*> link_elements, group_elements;
    std::set<std::string> node_ids, link_ids, skill_names;
    for (const auto& child : root.children) {
        if (child.name == "node") {
            detail::check_attributes(child, {"id", "label"});
            detail::no_children(child);
            GraphNode n{detail::required(child, "id"), detail::optional_attr(child, "label")};
            if (!node_ids.insert(n.id).second) raise(GraphErrc::DuplicateId, child, "duplicate node id '" + n.id + "'");
            g.nodes.push_back(std::move(n));
        } else if (child.name == "skill") {
            detail::check_attributes(child, {"name", "label", "p_init", "p_transit", "p_slip", "p_guess"});
            detail::no_children(child);
            SkillDef s;
            s.name = detail::required(child, "name");
            s.label = detail::optional_attr(child, "label");
            SkillParams defaults;
            s.params.p_init = detail::probability(child, "p_init", defaults.p_init);
            s.params.p_transit = detail::probability(child, "p_transit", defaults.p_transit);
            s.params.p_slip = detail::probability(child, "p_slip", defaults.p_slip);
            s.params.p_guess = detail::probability(child, "p_guess", defaults.p_guess);
            if (!skill_names.insert(s.name).second)
                raise(GraphErrc::DuplicateId, child, "duplicate skill '" + s.name + "'");
            g.skills.push_back(std::move(s));
        } else if (child.name == "link") {
            link_elements.push_back(&child);
        } else if (child.name == "group") {
            group_elements.push_back(&child);
        } else {
            raise(GraphErrc::SchemaViolation, child, "unknown element <" + child.name + ">");
        }
    }
    if (!detail::trim(root.text).empty()) raise(GraphErrc::SchemaViolation, root, "unexpected text in graph");
    if (!node_ids.count(g.start_node))
        throw GraphError(GraphErrc::NoStartNode, root.line, "<graph>", "start node '" + g.start_node + "' is not defined");

    for (const auto* el : link_elements) {
        GraphLink link = detail::parse_link(*el, g.links.size());
        if (!link_ids.insert(link.id).second) raise(GraphErrc::DuplicateId, *el, "duplicate link id '" + link.id + "'");
        if (!node_ids.count(link.source))
            raise(GraphErrc::DanglingReference, *el, "link '" + link.id + "' source '" + link.source + "' is not defined");
        if (!node_ids.count(link.target))
            raise(GraphErrc::DanglingReference, *el, "link '" + link.id + "' target '" + link.target + "' is not defined");
        for (const auto& s : link.skills)
            if (!skill_names.count(s))
                raise(GraphErrc::DanglingReference, *el, "link '" + link.id + "' references undefined skill '" + s + "'");
        g.links.push_back(std::move(link));
    }

    std::set<std::string> grouped;
    for (const auto* el : group_elements) {
        detail::check_attributes(*el, {"links"});
        detail::no_children(*el);
        auto members = detail::split_ws(detail::required(*el, "links"));
        if (members.size() < 2) raise(GraphErrc::SchemaViolation, *el, "a group needs at least two links");
        for (const auto& m : members) {
            const GraphLink* l = g.find_link(m);
            if (!l) raise(GraphErrc::DanglingReference, *el, "group references undefined link '" + m + "'");
            if (!advances(l->evaluation))
                raise(GraphErrc::SchemaViolation, *el, "incorrect link '" + m + "' cannot be grouped");
            if (!grouped.insert(m).second)
                raise(GraphErrc::SchemaViolation, *el, "link '" + m + "' belongs to more than one group");
        }
        g.unordered_groups.push_back(std::move(members));
    }
    return g;
}

inline std::string serialize_graph(const BehaviorGraph& g) {
    xml::Writer w;
    w.open("graph", {{"id", g.id}, {"title", g.title}, {"start", g.start_node}});
    for (const auto& s : g.skills) {
        w.empty("skill", {{"name", s.name},
                          {"label", s.label},
                          {"p_init", detail::format_double(s.params.p_init)},
                          {"p_transit", detail::format_double(s.params.p_transit)},
                          {"p_slip", detail::format_double(s.params.p_slip)},
                          {"p_guess", detail::format_double(s.params.p_guess)}});
    }
    for (const auto& n : g.nodes) w.empty("node", {{"id", n.id}, {"label", n.label}});
    for (const auto& l : g.links) {
        std::vector<std::pair<std::string, std::string>> attrs{
            {"id", l.id}, {"source", l.source}, {"target", l.target}, {"evaluation", std::string(to_string(l.evaluation))}};
        if (l.buggy_message) attrs.emplace_back("message", *l.buggy_message);
        if (!l.skills.empty()) {
            std::string joined;
            for (const auto& s : l.skills) joined += (joined.empty() ? "" : " ") + s;
            attrs.emplace_back("skills", joined);
        }
        w.open("link", attrs);
        w.empty("matcher", {{"selection", l.matcher.selection},
                            {"action", l.matcher.action},
                            {"input", l.matcher.input.pattern()},
                            {"match", std::string(to_string(l.matcher.input.kind()))}});
        for (const auto& h : l.hints) w.text_element("hint", h);
        w.close("link");
    }
    for (const auto& group : g.unordered_groups) {
        std::string joined;
        for (const auto& m : group) joined += (joined.empty() ? "" : " ") + m;
        w.empty("group", {{"links", joined}});
    }
    w.close("graph");
    return w.str();
}

// ---------------------------------------------------------------------------
// Authoring diagnostics

enum class DiagnosticKind {
    Unreachable,
    NoPathToDone,
    HintlessCorrectLink,
    SkillNeverExercised,
    SlipGuessSumExceedsOne,
    TooManyInterpretations,
};

enum class Severity { Warning, Error };

inline std::string_view to_string(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::Unreachable: return "Unreachable";
        case DiagnosticKind::NoPathToDone: return "NoPathToDone";
        case DiagnosticKind::HintlessCorrectLink: return "HintlessCorrectLink";
        case DiagnosticKind::SkillNeverExercised: return "SkillNeverExercised";
        case DiagnosticKind::SlipGuessSumExceedsOne: return "SlipGuessSumExceedsOne";
        case DiagnosticKind::TooManyInterpretations: return "TooManyInterpretations";
    }
    return "";
}

struct Diagnostic {
    DiagnosticKind kind;
    std::string subject;  // node id, link id, skill name or graph id

    Severity severity() const {
        switch (kind) {
            case DiagnosticKind::Unreachable:
            case DiagnosticKind::SkillNeverExercised: return Severity::Warning;
            default: return Severity::Error;
        }
    }

    std::string str() const {
        return std::string(severity() == Severity::Error ? "error" : "warning") + "\t" +
               std::string(to_string(kind)) + "\t" + subject;
    }

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

namespace detail {

// Counts distinct positions reachable through any sequence of steps,
// stopping once `limit` is exceeded.
inline std::size_t reachable_positions(const BehaviorGraph& g, std::size_t limit) {
    std::set<walk::Position> seen{walk::initial(g)};
    std::deque<walk::Position> queue{walk::initial(g)};
    while (!queue.empty() && seen.size() <= limit) {
        walk::Position pos = std::move(queue.front());
        queue.pop_front();
        for (const GraphLink* l : walk::candidates(g, pos)) {
            walk::Position next = walk::step(g, pos, *l);
            if (seen.insert(next).second) queue.push_back(std::move(next));
        }
    }
    return seen.size();
}

}  // namespace detail

/// Reports every authoring problem found; an empty result means the graph is
/// ready to tutor with. Diagnostics are ordered by kind, then by file order.
inline std::vector<Diagnostic> validate_graph(const BehaviorGraph& g) {
    std::vector<Diagnostic> out;
    const std::size_t n = g.nodes.size();

    std::vector<bool> reachable(n, false);
    if (std::size_t s = g.node_rank(g.start_node); s < n) {
        std::deque<std::size_t> queue{s};
        reachable[s] = true;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (const auto& l : g.links) {
                if (!advances(l.evaluation) || l.source != g.nodes[u].id) continue;
                std::size_t v = g.node_rank(l.target);
                if (v < n && !reachable[v]) {
                    reachable[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!reachable[i]) out.push_back({DiagnosticKind::Unreachable, g.nodes[i].id});

    // Backward search from terminal nodes (no outgoing Correct link).
    std::vector<bool> finishes(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        finishes[i] = std::none_of(g.links.begin(), g.links.end(), [&](const GraphLink& l) {
            return l.evaluation == Evaluation::Correct && l.source == g.nodes[i].id;
        });
    }
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& l : g.links) {
            if (l.evaluation != Evaluation::Correct) continue;
            std::size_t u = g.node_rank(l.source), v = g.node_rank(l.target);
            if (u < n && v < n && finishes[v] && !finishes[u]) {
                finishes[u] = true;
                changed = true;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!finishes[i]) out.push_back({DiagnosticKind::NoPathToDone, g.nodes[i].id});

    for (const auto& l : g.links)
        if (l.evaluation == Evaluation::Correct && l.hints.empty())
            out.push_back({DiagnosticKind::HintlessCorrectLink, l.id});

    for (const auto& s : g.skills) {
        bool used = std::any_of(g.links.begin(), g.links.end(), [&](const GraphLink& l) {
            return std::find(l.skills.begin(), l.skills.end(), s.name) != l.skills.end();
        });
        if (!used) out.push_back({DiagnosticKind::SkillNeverExercised, s.name});
    }
    for (const auto& s : g.skills)
        if (s.params.p_slip + s.params.p_guess > 1.0) out.push_back({DiagnosticKind::SlipGuessSumExceedsOne, s.name});

    if (detail::reachable_positions(g, kMaxInterpretations) > kMaxInterpretations)
        out.push_back({DiagnosticKind::TooManyInterpretations, g.id});
    return out;
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity() == Severity::Error; });
}

struct SkillMatrix {
    std::vector<std::string> links;   // rows: Correct links in document order
    std::vector<std::string> skills;  // columns: skill names, sorted
    std::vector<std::vector<int>> cells;

    std::size_t rows() const { return links.size(); }
    std::size_t cols() const { return skills.size(); }
};

inline SkillMatrix skill_matrix(const BehaviorGraph& g) {
    SkillMatrix m;
    for (const auto& s : g.skills) m.skills.push_back(s.name);
    std::sort(m.skills.begin(), m.skills.end());
    for (const auto& l : g.links) {
        if (l.evaluation != Evaluation::Correct) continue;
        m.links.push_back(l.id);
        std::vector<int> row;
        for (const auto& s : m.skills)
            row.push_back(std::find(l.skills.begin(), l.skills.end(), s) != l.skills.end() ? 1 : 0);
        m.cells.push_back(std::move(row));
    }
    return m;
}

inline std::string format_skill_matrix(const SkillMatrix& m) {
    std::string out = "link";
    for (const auto& s : m.skills) out += "\t" + s;
    out += "\n";
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += m.links[r];
        for (int c : m.cells[r]) out += c ? "\t1" : "\t0";
        out += "\n";
    }
    return out;
}

}  // namespace gatutor
