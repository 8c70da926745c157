#pragma once

// Gene adjacency analysis: `.cds.tab` parsing, neighbourhood binary codes,
// transcriptional-unit prediction and code comparison across genomes.
//
// Bit i of a genome's code is 1 when genes i and i+1 (sorted by start) sit on
// the same strand and the intergenic gap is at most the threshold.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace gatutor::adjacency {

inline constexpr std::int64_t kDefaultGapThreshold = 200;
inline constexpr std::size_t kDefaultMinMatchLength = 3;

enum class Strand { Plus, Minus };

inline char strand_char(Strand s) { return s == Strand::Plus ? '+' : '-'; }

struct GeneRecord {
    std::string genome_id;
    std::string gene_id;
    Strand strand = Strand::Plus;
    std::int64_t start = 1;  // 1-based, inclusive
    std::int64_t end = 1;

    friend bool operator==(const GeneRecord&, const GeneRecord&) = default;
};

struct Genome {
    std::string genome_id;
    std::vector<GeneRecord> genes;  // sorted by start
};

struct AdjacencyCode {
    std::string genome_id;
    std::string bits;  // '0'/'1', length max(n-1, 0)

    friend bool operator==(const AdjacencyCode&, const AdjacencyCode&) = default;
};

struct TranscriptionalUnit {
    std::string genome_id;
    std::size_t first = 0;  // inclusive indexes into Genome::genes
    std::size_t last = 0;

    friend bool operator==(const TranscriptionalUnit&, const TranscriptionalUnit&) = default;
};

struct PatternHit {
    std::string genome_id;
    std::size_t offset = 0;

    friend bool operator==(const PatternHit&, const PatternHit&) = default;
};

struct SharedSegment {
    std::string bits;
    std::size_t offset_a = 0;
    std::size_t offset_b = 0;

    friend bool operator==(const SharedSegment&, const SharedSegment&) = default;
    friend auto operator<=>(const SharedSegment&, const SharedSegment&) = default;
};

enum class AdjacencyErrc { BadHeader, BadStrand, BadCoordinate, ColumnCount, LengthMismatch, EmptyPattern };

inline std::string_view to_string(AdjacencyErrc e) {
    switch (e) {
        case AdjacencyErrc::BadHeader: return "BadHeader";
        case AdjacencyErrc::BadStrand: return "BadStrand";
        case AdjacencyErrc::BadCoordinate: return "BadCoordinate";
        case AdjacencyErrc::ColumnCount: return "ColumnCount";
        case AdjacencyErrc::LengthMismatch: return "LengthMismatch";
        case AdjacencyErrc::EmptyPattern: return "EmptyPattern";
    }
    return "";
}

class AdjacencyError : public std::runtime_error {
public:
    AdjacencyError(AdjacencyErrc kind, std::size_t line, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + (line ? " at line " + std::to_string(line) : "") + ": " +
                             detail),
          kind_(kind), line_(line) {}

    AdjacencyErrc kind() const noexcept { return kind_; }
    std::size_t line() const noexcept { return line_; }  // 0 when not tied to input text

private:
    AdjacencyErrc kind_;
    std::size_t line_;
};

inline constexpr std::string_view kCdsTabHeader = "genome_id\tgene_id\tstrand\tstart\tend";

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    for (;;) {
        auto tab = line.find('\t', begin);
        out.push_back(line.substr(begin, tab == std::string_view::npos ? std::string_view::npos : tab - begin));
        if (tab == std::string_view::npos) return out;
        begin = tab + 1;
    }
}

inline std::int64_t coordinate(std::string_view field, std::size_t line, const char* name) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || v < 1)
        throw AdjacencyError(AdjacencyErrc::BadCoordinate, line,
                             std::string(name) + " '" + std::string(field) + "' is not a positive integer");
    return v;
}

}  // namespace detail

/// Parses a `.cds.tab` table. Blank lines and `#` comments are skipped
/// everywhere; the first remaining line must be the column header.
inline std::vector<GeneRecord> parse_refseq_tab(std::string_view text) {
    std::vector<GeneRecord> out;
    bool header_seen = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;

        if (!header_seen) {
            if (line != kCdsTabHeader)
                throw AdjacencyError(AdjacencyErrc::BadHeader, line_no,
                                     "expected header 'genome_id<TAB>gene_id<TAB>strand<TAB>start<TAB>end'");
            header_seen = true;
            continue;
        }
        auto f = detail::split_tabs(line);
        if (f.size() != 5)
            throw AdjacencyError(AdjacencyErrc::ColumnCount, line_no,
                                 "expected 5 columns, found " + std::to_string(f.size()));
        GeneRecord r;
        r.genome_id = std::string(f[0]);
        r.gene_id = std::string(f[1]);
        if (r.genome_id.empty() || r.gene_id.empty())
            throw AdjacencyError(AdjacencyErrc::ColumnCount, line_no, "empty genome_id or gene_id");
        if (f[2] == "+") r.strand = Strand::Plus;
        else if (f[2] == "-" || f[2] == "\xE2\x88\x92") r.strand = Strand::Minus;
        else throw AdjacencyError(AdjacencyErrc::BadStrand, line_no, "strand '" + std::string(f[2]) + "' is not + or -");
        r.start = detail::coordinate(f[3], line_no, "start");
        r.end = detail::coordinate(f[4], line_no, "end");
        if (r.start > r.end)
            throw AdjacencyError(AdjacencyErrc::BadCoordinate, line_no, "start is greater than end");
        out.push_back(std::move(r));
    }
    if (!header_seen) throw AdjacencyError(AdjacencyErrc::BadHeader, line_no ? line_no : 1, "missing header line");
    return out;
}

/// Groups records by genome id (ascending) and sorts each genome's genes by
/// start, then end, then gene id.
inline std::vector<Genome> build_genomes(const std::vector<GeneRecord>& records) {
    std::map<std::string, Genome> by_id;
    for (const auto& r : records) {
        auto& g = by_id[r.genome_id];
        g.genome_id = r.genome_id;
        g.genes.push_back(r);
    }
    std::vector<Genome> out;
    for (auto& [id, g] : by_id) {
        std::stable_sort(g.genes.begin(), g.genes.end(), [](const GeneRecord& a, const GeneRecord& b) {
            return std::tie(a.start, a.end, a.gene_id) < std::tie(b.start, b.end, b.gene_id);
        });
        out.push_back(std::move(g));
    }
    return out;
}

inline AdjacencyCode adjacency_code(const Genome& genome, std::int64_t gap_threshold) {
    AdjacencyCode code{genome.genome_id, {}};
    const auto& genes = genome.genes;
    for (std::size_t i = 0; i + 1 < genes.size(); ++i) {
        bool same_strand = genes[i].strand == genes[i + 1].strand;
        bool close = genes[i + 1].start - genes[i].end <= gap_threshold;
        code.bits += same_strand && close ? '1' : '0';
    }
    return code;
}

/// Each maximal run of 1-bits joins the genes on both sides of its bits into
/// one unit; every other gene is a unit of its own.
inline std::vector<TranscriptionalUnit> predict_units(const Genome& genome, const AdjacencyCode& code) {
    const std::size_t n = genome.genes.size();
    const std::size_t expected = n == 0 ? 0 : n - 1;
    if (code.bits.size() != expected)
        throw AdjacencyError(AdjacencyErrc::LengthMismatch, 0,
                             "code has " + std::to_string(code.bits.size()) + " bits for " + std::to_string(n) +
                                 " genes");
    std::vector<TranscriptionalUnit> units;
    std::size_t first = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && code.bits[i] == '1') continue;
        units.push_back({genome.genome_id, first, i});
        first = i + 1;
    }
    return units;
}

/// All (possibly overlapping) occurrences of `pattern`, by code order then offset.
inline std::vector<PatternHit> match_pattern(const std::vector<AdjacencyCode>& codes, std::string_view pattern) {
    if (pattern.empty()) throw AdjacencyError(AdjacencyErrc::EmptyPattern, 0, "pattern is empty");
    std::vector<PatternHit> hits;
    for (const auto& c : codes) {
        std::string_view bits = c.bits;
        for (auto at = bits.find(pattern); at != std::string_view::npos; at = bits.find(pattern, at + 1))
            hits.push_back({c.genome_id, at});
    }
    return hits;
}

/// Maximal common substrings of length >= min_len. A match at (i, j) is
/// maximal when it cannot be extended left or right at that offset pair;
/// each is a maximal run of equal characters along one diagonal.
inline std::vector<SharedSegment> compare_genomes(const AdjacencyCode& a, const AdjacencyCode& b, std::size_t min_len) {
    std::vector<SharedSegment> out;
    const auto& x = a.bits;
    const auto& y = b.bits;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size()), m = static_cast<std::ptrdiff_t>(y.size());
    for (std::ptrdiff_t d = -(m - 1); d <= n - 1; ++d) {
        std::ptrdiff_t i = std::max<std::ptrdiff_t>(d, 0);
        std::ptrdiff_t j = i - d;
        while (i < n && j < m) {
            if (x[static_cast<std::size_t>(i)] != y[static_cast<std::size_t>(j)]) {
                ++i;
                ++j;
                continue;
            }
            std::ptrdiff_t len = 0;
            while (i + len < n && j + len < m && x[static_cast<std::size_t>(i + len)] == y[static_cast<std::size_t>(j + len)])
                ++len;
            if (static_cast<std::size_t>(len) >= min_len)
                out.push_back({x.substr(static_cast<std::size_t>(i), static_cast<std::size_t>(len)),
                               static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
            i += len;
            j += len;
        }
    }
    std::sort(out.begin(), out.end(), [](const SharedSegment& p, const SharedSegment& q) {
        return std::tie(p.offset_a, p.offset_b) < std::tie(q.offset_a, q.offset_b);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Reports

struct AnalysisOptions {
    std::int64_t gap_threshold = kDefaultGapThreshold;
    std::size_t min_match_length = kDefaultMinMatchLength;
    std::vector<std::string> patterns;
};

struct GenomeComparison {
    std::string genome_a;
    std::string genome_b;
    std::vector<SharedSegment> shared;
};

struct PatternResult {
    std::string pattern;
    std::vector<PatternHit> hits;
};

struct Analysis {
    AnalysisOptions options;
    std::vector<Genome> genomes;  // by genome id
    std::vector<AdjacencyCode> codes;
    std::vector<std::vector<TranscriptionalUnit>> units;
    std::vector<GenomeComparison> comparisons;  // every pair a < b
    std::vector<PatternResult> patterns;
};

inline Analysis analyze(const std::vector<GeneRecord>& records, AnalysisOptions options = {}) {
    Analysis r;
    r.options = std::move(options);
    r.genomes = build_genomes(records);
    for (const auto& g : r.genomes) {
        r.codes.push_back(adjacency_code(g, r.options.gap_threshold));
        r.units.push_back(predict_units(g, r.codes.back()));
    }
    for (std::size_t i = 0; i < r.codes.size(); ++i)
        for (std::size_t j = i + 1; j < r.codes.size(); ++j)
            r.comparisons.push_back({r.codes[i].genome_id, r.codes[j].genome_id,
                                     compare_genomes(r.codes[i], r.codes[j], r.options.min_match_length)});
    for (const auto& p : r.options.patterns) r.patterns.push_back({p, match_pattern(r.codes, p)});
    return r;
}

namespace detail {

inline std::string gene_list(const Genome& g, const TranscriptionalUnit& u) {
    std::string s;
    for (std::size_t k = u.first; k <= u.last; ++k) s += (k == u.first ? "" : ",") + g.genes[k].gene_id;
    return s;
}

}  // namespace detail

/// Human-readable text report. Gene positions in unit lines are 1-based.
inline std::string export_report(const Analysis& r) {
    std::string out = "gene adjacency report\n";
    out += "gap_threshold\t" + std::to_string(r.options.gap_threshold) + "\n";
    out += "min_match_length\t" + std::to_string(r.options.min_match_length) + "\n";
    out += "genomes\t" + std::to_string(r.genomes.size()) + "\n";
    for (std::size_t i = 0; i < r.genomes.size(); ++i) {
        const auto& g = r.genomes[i];
        out += "\ngenome\t" + g.genome_id + "\n";
        out += "genes\t" + std::to_string(g.genes.size()) + "\n";
        out += "code\t" + r.codes[i].bits + "\n";
        for (const auto& u : r.units[i]) {
            out += "unit genes " + std::to_string(u.first + 1) + ".." + std::to_string(u.last + 1) + "\t" +
                   strand_char(g.genes[u.first].strand) + "\t" + detail::gene_list(g, u) + "\n";
        }
    }
    for (const auto& c : r.comparisons) {
        out += "\ncomparison\t" + c.genome_a + "\t" + c.genome_b + "\n";
        for (const auto& s : c.shared)
            out += "shared\t" + s.bits + "\t" + std::to_string(s.offset_a) + "\t" + std::to_string(s.offset_b) + "\n";
    }
    for (const auto& p : r.patterns) {
        out += "\npattern\t" + p.pattern + "\n";
        for (const auto& h : p.hits) out += "hit\t" + h.genome_id + "\t" + std::to_string(h.offset) + "\n";
    }
    return out;
}

/// Machine-readable variant: one tab-separated record per line.
inline std::string export_records(const Analysis& r) {
    std::string out = "#record\tfields\n";
    for (std::size_t i = 0; i < r.genomes.size(); ++i) {
        const auto& g = r.genomes[i];
        out += "code\t" + g.genome_id + "\t" + std::to_string(g.genes.size()) + "\t" + r.codes[i].bits + "\n";
        for (const auto& u : r.units[i]) {
            out += "unit\t" + g.genome_id + "\t" + std::to_string(u.first + 1) + "\t" + std::to_string(u.last + 1) +
                   "\t" + strand_char(g.genes[u.first].strand) + "\t" + detail::gene_list(g, u) + "\n";
        }
    }
    for (const auto& c : r.comparisons)
        for (const auto& s : c.shared)
            out += "shared\t" + c.genome_a + "\t" + c.genome_b + "\t" + s.bits + "\t" + std::to_string(s.offset_a) +
                   "\t" + std::to_string(s.offset_b) + "\n";
    for (const auto& p : r.patterns)
        for (const auto& h : p.hits) out += "hit\t" + p.pattern + "\t" + h.genome_id + "\t" + std::to_string(h.offset) + "\n";
    return out;
}

}  // namespace gatutor::adjacency
