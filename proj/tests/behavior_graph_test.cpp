#include <gtest/gtest.h>

#include <random>

#include "gatutor/behavior_graph.hpp"
#include "oracles/graph_equal.hpp"
#include "support/fixtures.hpp"
#include "support/random_graphs.hpp"

using namespace gatutor;
using gatutor::testing::fixture;
using gatutor::testing::slurp;

namespace {

GraphErrc error_kind(const std::string& text) {
    try {
        parse_graph(text);
    } catch (const GraphError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected GraphError";
    return GraphErrc::SchemaViolation;
}

std::vector<DiagnosticKind> kinds(const std::vector<Diagnostic>& d) {
    std::vector<DiagnosticKind> out;
    for (const auto& x : d) out.push_back(x.kind);
    return out;
}

}  // namespace

TEST(ParseGraph, MinimalDocument) {
    auto g = parse_graph(slurp(fixture("graphs/minimal.brd.xml")));
    EXPECT_EQ(g.nodes.size(), 1u);
    EXPECT_TRUE(g.links.empty());
    EXPECT_EQ(g.start_node, "only");
}

TEST(ParseGraph, TutorialFixtureShape) {
    auto g = parse_graph(slurp(fixture("graphs/gap-tutorial.brd.xml")));
    EXPECT_EQ(g.nodes.size(), 7u);
    EXPECT_EQ(g.correct_link_count(), 6u);
    auto incorrect = std::count_if(g.links.begin(), g.links.end(),
                                   [](const GraphLink& l) { return l.evaluation == Evaluation::Incorrect; });
    EXPECT_GE(incorrect, 1);
    for (std::size_t i = 0; i < g.links.size(); ++i) EXPECT_EQ(g.links[i].document_order, i);

    const GraphLink* choose = g.find_link("choose-file");
    ASSERT_NE(choose, nullptr);
    EXPECT_EQ(choose->matcher.input.kind(), MatchPattern::Kind::Wildcard);
    EXPECT_TRUE(choose->matcher.accepts("CHOOSE FILE", "FileSelected", "genomeA.RefSeq.cds.tab"));
    EXPECT_FALSE(choose->matcher.accepts("CHOOSE FILE", "FileSelected", "genomeA.gff"));
    EXPECT_EQ(choose->hints.size(), 3u);
    EXPECT_EQ(g.find_link("process-before-file")->buggy_message.value_or(""), "Select a RefSeq file first");
}

TEST(ParseGraph, SkillDefaultsApplyWhenOmitted) {
    auto g = parse_graph(slurp(fixture("graphs/multi-file.brd.xml")));
    const SkillDef* s = g.find_skill("select-file");
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->params, SkillParams{});
    EXPECT_DOUBLE_EQ(g.find_skill("add-file")->params.p_init, 0.1);
    ASSERT_EQ(g.unordered_groups.size(), 1u);
    EXPECT_EQ(g.unordered_groups[0], (std::vector<std::string>{"choose-genome-a", "add-genome-b"}));
}

TEST(ParseGraph, DanglingTargetNamesTheLink) {
    try {
        parse_graph(slurp(fixture("graphs/invalid/dangling-target.brd.xml")));
        FAIL();
    } catch (const GraphError& e) {
        EXPECT_EQ(e.kind(), GraphErrc::DanglingReference);
        EXPECT_NE(std::string(e.what()).find("to-nowhere"), std::string::npos);
        EXPECT_EQ(e.line(), 5u);
        EXPECT_EQ(e.context(), "<link id=\"to-nowhere\">");
    }
}

TEST(ParseGraph, ErrorKinds) {
    EXPECT_EQ(error_kind(slurp(fixture("graphs/invalid/malformed.brd.xml"))), GraphErrc::MalformedXml);
    EXPECT_EQ(error_kind(slurp(fixture("graphs/invalid/no-start.brd.xml"))), GraphErrc::NoStartNode);
    EXPECT_EQ(error_kind(R"(<graph id="g"><node id="a"/></graph>)"), GraphErrc::NoStartNode);
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="a"/></graph>)"), GraphErrc::DuplicateId);
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><widget/></graph>)"), GraphErrc::SchemaViolation);
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a" colour="red"><node id="a"/></graph>)"), GraphErrc::SchemaViolation);
    EXPECT_EQ(error_kind(R"(<nodes/>)"), GraphErrc::SchemaViolation);
    // link without matcher
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><link id="l" source="a" target="a"/></graph>)"),
              GraphErrc::SchemaViolation);
    // incorrect link that advances
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="b"/>
        <link id="l" source="a" target="b" evaluation="incorrect"><matcher selection="s" action="a"/></link></graph>)"),
              GraphErrc::SchemaViolation);
    // regex that does not compile
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="b"/>
        <link id="l" source="a" target="b"><matcher selection="s" action="a" input="([" match="regex"/><hint>h</hint></link></graph>)"),
              GraphErrc::SchemaViolation);
    // undefined skill
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="b"/>
        <link id="l" source="a" target="b" skills="ghost"><matcher selection="s" action="a"/><hint>h</hint></link></graph>)"),
              GraphErrc::DanglingReference);
    // probability out of range
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><skill name="s" p_slip="1.5"/><node id="a"/></graph>)"),
              GraphErrc::SchemaViolation);
    // link in two groups
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="b"/><node id="c"/>
        <link id="l1" source="a" target="b"><matcher selection="s" action="a"/><hint>h</hint></link>
        <link id="l2" source="b" target="c"><matcher selection="s" action="a"/><hint>h</hint></link>
        <link id="l3" source="a" target="c"><matcher selection="t" action="a"/><hint>h</hint></link>
        <group links="l1 l2"/><group links="l2 l3"/></graph>)"),
              GraphErrc::SchemaViolation);
    // group naming an unknown link
    EXPECT_EQ(error_kind(R"(<graph id="g" start="a"><node id="a"/><node id="b"/>
        <link id="l1" source="a" target="b"><matcher selection="s" action="a"/><hint>h</hint></link>
        <group links="l1 l9"/></graph>)"),
              GraphErrc::DanglingReference);
}

TEST(SerializeGraph, MinimalRoundTrip) {
    auto g = parse_graph(slurp(fixture("graphs/minimal.brd.xml")));
    EXPECT_EQ(parse_graph(serialize_graph(g)), g);
}

TEST(SerializeGraph, TutorialRoundTripPreservesStructure) {
    auto g = parse_graph(slurp(fixture("graphs/gap-tutorial.brd.xml")));
    auto back = parse_graph(serialize_graph(g));
    EXPECT_EQ(oracle::graph_difference(g, back), "");
    EXPECT_EQ(back.nodes.size(), 7u);
    EXPECT_EQ(back.links[0].hints, g.links[0].hints);
}

TEST(SerializeGraph, RoundTripKeepsGroups) {
    auto g = parse_graph(slurp(fixture("graphs/multi-file.brd.xml")));
    auto back = parse_graph(serialize_graph(g));
    EXPECT_EQ(oracle::graph_difference(g, back), "");
    EXPECT_EQ(back.unordered_groups, g.unordered_groups);
}

TEST(SerializeGraph, RandomGraphsRoundTrip) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        BehaviorGraph g = gatutor::testing::random_graph_once(rng, 8, 12);
        g.title = "t<&>\"" + std::to_string(i);
        g.skills[1].params.p_init = 1.0 / 3.0;
        if (!g.links.empty()) g.links[0].buggy_message = "  spaced & \"quoted\"\n";
        auto back = parse_graph(serialize_graph(g));
        ASSERT_EQ(oracle::graph_difference(g, back), "") << serialize_graph(g);
    }
}

TEST(ValidateGraph, FixtureCorpusIsTutorReady) {
    for (const char* name : {"gap-tutorial", "minimal", "multi-file", "pattern-search", "alternatives"}) {
        auto g = parse_graph(slurp(fixture(std::string("graphs/") + name + ".brd.xml")));
        EXPECT_TRUE(validate_graph(g).empty()) << name;
    }
}

TEST(ValidateGraph, IsolatedNodeIsUnreachable) {
    auto g = parse_graph(slurp(fixture("graphs/invalid/isolated-node.brd.xml")));
    auto d = validate_graph(g);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0], (Diagnostic{DiagnosticKind::Unreachable, "island"}));
    EXPECT_FALSE(has_errors(d));
}

TEST(ValidateGraph, SlipPlusGuessAboveOne) {
    auto g = parse_graph(slurp(fixture("graphs/invalid/slip-guess.brd.xml")));
    EXPECT_EQ(kinds(validate_graph(g)), std::vector<DiagnosticKind>{DiagnosticKind::SlipGuessSumExceedsOne});
}

TEST(ValidateGraph, HintlessCorrectLink) {
    auto g = parse_graph(slurp(fixture("graphs/invalid/hintless.brd.xml")));
    EXPECT_EQ(validate_graph(g), (std::vector<Diagnostic>{{DiagnosticKind::HintlessCorrectLink, "silent"}}));
}

TEST(ValidateGraph, UnusedSkillAndDeadEnd) {
    auto g = parse_graph(R"(<graph id="g" start="a">
        <skill name="unused"/>
        <node id="a"/><node id="b"/><node id="c"/>
        <link id="ab" source="a" target="b"><matcher selection="s" action="x"/><hint>h</hint></link>
        <link id="ba" source="b" target="a"><matcher selection="t" action="x"/><hint>h</hint></link>
        <link id="ac" source="a" target="c" evaluation="suboptimal"><matcher selection="u" action="x"/></link>
      </graph>)");
    auto d = validate_graph(g);
    // a and b only cycle between each other via Correct links; c is a dead end
    // reachable only through a Suboptimal link, which still counts as reachable.
    EXPECT_EQ(d, (std::vector<Diagnostic>{{DiagnosticKind::NoPathToDone, "a"},
                                          {DiagnosticKind::NoPathToDone, "b"},
                                          {DiagnosticKind::SkillNeverExercised, "unused"}}));
}

TEST(ValidateGraph, InterpretationExplosionIsReported) {
    // Nine grouped links in one chain admit 2^9 distinct consumed sets.
    std::string xml = R"(<graph id="wide" start="n0">)";
    for (int i = 0; i <= 9; ++i) xml += "<node id=\"n" + std::to_string(i) + "\"/>";
    std::string members;
    for (int i = 0; i < 9; ++i) {
        std::string id = "l" + std::to_string(i);
        xml += "<link id=\"" + id + "\" source=\"n" + std::to_string(i) + "\" target=\"n" + std::to_string(i + 1) +
               "\"><matcher selection=\"s" + std::to_string(i) + "\" action=\"a\"/><hint>h</hint></link>";
        members += id + " ";
    }
    xml += "<group links=\"" + members + "\"/></graph>";
    auto d = validate_graph(parse_graph(xml));
    EXPECT_EQ(kinds(d), std::vector<DiagnosticKind>{DiagnosticKind::TooManyInterpretations});
}

TEST(ValidateGraph, IsIdempotent) {
    auto g = parse_graph(slurp(fixture("graphs/invalid/isolated-node.brd.xml")));
    auto first = validate_graph(g);
    auto copy = g;
    EXPECT_EQ(validate_graph(g), first);
    EXPECT_EQ(g, copy);
}

TEST(SkillMatrix, IdentityForDistinctSkills) {
    auto g = parse_graph(R"(<graph id="g" start="a">
        <skill name="y"/><skill name="x"/>
        <node id="a"/><node id="b"/><node id="c"/>
        <link id="first" source="a" target="b" skills="x"><matcher selection="s" action="x"/><hint>h</hint></link>
        <link id="second" source="b" target="c" skills="y"><matcher selection="t" action="x"/><hint>h</hint></link>
      </graph>)");
    auto m = skill_matrix(g);
    EXPECT_EQ(m.skills, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(m.cells, (std::vector<std::vector<int>>{{1, 0}, {0, 1}}));
}

TEST(SkillMatrix, TutorialFixtureTags) {
    auto m = skill_matrix(parse_graph(slurp(fixture("graphs/gap-tutorial.brd.xml"))));
    EXPECT_EQ(m.skills, (std::vector<std::string>{"process-files", "select-file"}));
    EXPECT_EQ(m.links, (std::vector<std::string>{"choose-file", "next-after-file", "next-after-add", "process-files",
                                                 "download-report", "done"}));
    EXPECT_EQ(m.cells, (std::vector<std::vector<int>>{{0, 1}, {0, 0}, {0, 0}, {1, 0}, {1, 0}, {0, 0}}));
}

TEST(SkillMatrix, NoSkillsGivesZeroColumns) {
    auto g = parse_graph(slurp(fixture("graphs/alternatives.brd.xml")));
    g.skills.clear();
    for (auto& l : g.links) l.skills.clear();
    auto m = skill_matrix(g);
    EXPECT_EQ(m.cols(), 0u);
    EXPECT_EQ(m.rows(), g.correct_link_count());
}

TEST(SkillMatrix, DimensionsMatchGraph) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        auto g = gatutor::testing::random_graph(rng);
        auto m = skill_matrix(g);
        EXPECT_EQ(m.rows(), g.correct_link_count());
        EXPECT_EQ(m.cols(), g.skills.size());
    }
}

TEST(MatchPatternTest, WildcardSemantics) {
    auto w = MatchPattern::wildcard("*.RefSeq.cds.tab");
    EXPECT_TRUE(w.accepts("x.RefSeq.cds.tab"));
    EXPECT_TRUE(w.accepts(".RefSeq.cds.tab"));
    EXPECT_FALSE(w.accepts("x.RefSeq.cds.tabs"));
    EXPECT_TRUE(MatchPattern::wildcard("a?c").accepts("abc"));
    EXPECT_FALSE(MatchPattern::wildcard("a?c").accepts("ac"));
    EXPECT_TRUE(MatchPattern::wildcard("a*b*c").accepts("aXbYbZc"));
    // only * and ? are special
    EXPECT_TRUE(MatchPattern::wildcard("[x]").accepts("[x]"));
    EXPECT_FALSE(MatchPattern::wildcard("[x]").accepts("x"));
    EXPECT_TRUE(MatchPattern::regex("1{2,}").accepts("111"));
    EXPECT_FALSE(MatchPattern::regex("1{2,}").accepts("1101"));
    EXPECT_TRUE(MatchPattern::exact("").accepts(""));
}
