#pragma once

// Per-skill mastery estimates using two-step Bayesian knowledge tracing,
// plus mastery-driven problem selection.

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gatutor/behavior_graph.hpp"
#include "gatutor/example_tracer.hpp"

namespace gatutor {

inline constexpr double kMasteryThreshold = 0.95;

struct MasteryEntry {
    SkillParams params;
    double p_know = 0.0;
    std::size_t opportunities = 0;

    friend bool operator==(const MasteryEntry&, const MasteryEntry&) = default;
};

struct SkillMastery {
    std::map<std::string, MasteryEntry> entries;

    friend bool operator==(const SkillMastery&, const SkillMastery&) = default;
};

enum class MasteryErrc { UnknownSkill, EmptyLibrary };

class MasteryError : public std::runtime_error {
public:
    MasteryError(MasteryErrc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    MasteryErrc kind() const noexcept { return kind_; }

private:
    MasteryErrc kind_;
};

/// Emitted when the evidence has zero likelihood under the current estimate;
/// the posterior then falls back to the prior.
struct DegenerateEvidence {
    std::string skill;
    bool correct = false;
};

inline SkillMastery init_mastery(const BehaviorGraph& g) {
    SkillMastery m;
    for (const auto& s : g.skills) m.entries[s.name] = {s.params, s.params.p_init, 0};
    return m;
}

inline double posterior_know(double p_know, const SkillParams& p, bool correct, bool* degenerate = nullptr) {
    const double num = correct ? p_know * (1.0 - p.p_slip) : p_know * p.p_slip;
    const double den = correct ? num + (1.0 - p_know) * p.p_guess : num + (1.0 - p_know) * (1.0 - p.p_slip);
    if (degenerate) *degenerate = den <= 0.0;
    if (den <= 0.0) return p_know;
    return std::clamp(num / den, 0.0, 1.0);
}

inline SkillMastery update_on_evidence(const SkillMastery& mastery, std::string_view skill, bool correct,
                                       std::vector<DegenerateEvidence>* warnings = nullptr) {
    auto it = mastery.entries.find(std::string(skill));
    if (it == mastery.entries.end())
        throw MasteryError(MasteryErrc::UnknownSkill, "unknown skill '" + std::string(skill) + "'");

    SkillMastery out = mastery;
    MasteryEntry& e = out.entries[it->first];
    bool degenerate = false;
    double post = posterior_know(e.p_know, e.params, correct, &degenerate);
    if (degenerate && warnings) warnings->push_back({it->first, correct});
    e.p_know = std::clamp(post + (1.0 - post) * e.params.p_transit, 0.0, 1.0);
    ++e.opportunities;
    return out;
}

/// Skills that receive evidence from a verdict; empty when the verdict carries
/// no attributable step.
inline std::vector<std::string> evidence_skills(const BehaviorGraph& g, const Verdict& v) {
    const GraphLink* link = nullptr;
    if (!v.matched_links.empty()) link = g.find_link(v.matched_links.front());
    else if (v.expected_link) link = g.find_link(*v.expected_link);
    return link ? link->skills : std::vector<std::string>{};
}

inline SkillMastery apply_verdict(const SkillMastery& mastery, const BehaviorGraph& g, const Verdict& v,
                                  std::vector<DegenerateEvidence>* warnings = nullptr) {
    SkillMastery out = mastery;
    for (const auto& skill : evidence_skills(g, v)) out = update_on_evidence(out, skill, v.correct(), warnings);
    return out;
}

/// Skills tagged on the steps a learner can take in the graph.
inline std::set<std::string> exercised_skills(const BehaviorGraph& g) {
    std::set<std::string> out;
    for (const auto& l : g.links)
        if (advances(l.evaluation)) out.insert(l.skills.begin(), l.skills.end());
    return out;
}

/// Picks the problem that exercises the most unmastered skills; ties go to
/// the graph with fewer Correct steps, then to the smaller id.
inline std::string select_next_problem(const SkillMastery& mastery, const std::vector<const BehaviorGraph*>& library,
                                       double threshold = kMasteryThreshold) {
    if (library.empty()) throw MasteryError(MasteryErrc::EmptyLibrary, "problem library is empty");
    auto key = [&](const BehaviorGraph& g) {
        long unmastered = 0;
        for (const auto& s : exercised_skills(g)) {
            auto it = mastery.entries.find(s);
            if (it == mastery.entries.end() || it->second.p_know < threshold) ++unmastered;
        }
        return std::make_tuple(-unmastered, g.correct_link_count(), g.id);
    };
    const BehaviorGraph* best = library.front();
    auto best_key = key(*best);
    for (const auto* g : library) {
        auto k = key(*g);
        if (k < best_key) {
            best = g;
            best_key = std::move(k);
        }
    }
    return best->id;
}

/// Tab-separated snapshot: header line, then `skill  p_know  opportunities`.
inline std::string format_mastery(const SkillMastery& m) {
    std::string out = "skill\tp_know\topportunities\n";
    char buf[64];
    for (const auto& [name, e] : m.entries) {
        std::snprintf(buf, sizeof buf, "%.6f", e.p_know);
        out += name + "\t" + buf + "\t" + std::to_string(e.opportunities) + "\n";
    }
    return out;
}

}  // namespace gatutor
