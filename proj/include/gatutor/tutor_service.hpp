#pragma once

// Tutoring sessions: binds a problem graph, its trace, skill mastery and the
// learner's uploaded annotation files, persisted one directory per session.
//
// Layout under the data directory:
//   sessions/<id>/events.jsonl        append-only event log (source of truth)
//   sessions/<id>/transactions.jsonl  traced transactions, replayable by the CLI
//   sessions/<id>/session.json        snapshot of the derived state
//   sessions/<id>/files/<name>        uploaded .cds.tab files
//   results/<id>.txt, results/<id>.tsv
// Session state is rebuilt from events.jsonl whenever a session is first
// touched after a restart.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gatutor/behavior_graph.hpp"
#include "gatutor/example_tracer.hpp"
#include "gatutor/gene_adjacency.hpp"
#include "gatutor/json_codec.hpp"
#include "gatutor/knowledge_tracer.hpp"

namespace gatutor::service {

namespace fs = std::filesystem;

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    fs::path data_dir = "data";
    fs::path problems_dir;  // empty: <data_dir>/problems
    std::int64_t gap_threshold = adjacency::kDefaultGapThreshold;
    std::size_t min_match_length = adjacency::kDefaultMinMatchLength;
    double mastery_threshold = kMasteryThreshold;
    bool hints_enabled = true;
    fs::path static_dir;  // optional directory served at /

    fs::path problems() const { return problems_dir.empty() ? data_dir / "problems" : problems_dir; }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checks numeric ranges (port 0 means any free port) and that the data directory can be created and written.
inline void validate_config(const ServiceConfig& cfg) {
    if (cfg.port < 0 || cfg.port > 65535) throw ConfigError("port must be in [0, 65535]");
    if (cfg.gap_threshold < 0) throw ConfigError("gap threshold must be >= 0");
    if (cfg.min_match_length < 1) throw ConfigError("minimum match length must be >= 1");
    if (!(cfg.mastery_threshold > 0.0 && cfg.mastery_threshold <= 1.0))
        throw ConfigError("mastery threshold must be in (0, 1]");
    std::error_code ec;
    fs::create_directories(cfg.data_dir, ec);
    fs::path probe = cfg.data_dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw ConfigError("data directory '" + cfg.data_dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

enum class Errc {
    BadRequest,
    UnknownGraph,
    UnknownSession,
    UnknownResult,
    SessionDone,
    AlreadyDone,
    DuplicateName,
    NoFiles,
    ParseError,
    HintsDisabled,
};

inline std::string_view to_string(Errc e) {
    switch (e) {
        case Errc::BadRequest: return "BadRequest";
        case Errc::UnknownGraph: return "UnknownGraph";
        case Errc::UnknownSession: return "UnknownSession";
        case Errc::UnknownResult: return "UnknownResult";
        case Errc::SessionDone: return "SessionDone";
        case Errc::AlreadyDone: return "AlreadyDone";
        case Errc::DuplicateName: return "DuplicateName";
        case Errc::NoFiles: return "NoFiles";
        case Errc::ParseError: return "ParseError";
        case Errc::HintsDisabled: return "HintsDisabled";
    }
    return "";
}

inline int http_status(Errc e) {
    switch (e) {
        case Errc::BadRequest: return 400;
        case Errc::HintsDisabled: return 403;
        case Errc::UnknownGraph:
        case Errc::UnknownSession:
        case Errc::UnknownResult: return 404;
        case Errc::SessionDone:
        case Errc::AlreadyDone:
        case Errc::DuplicateName:
        case Errc::NoFiles: return 409;
        case Errc::ParseError: return 422;
    }
    return 500;
}

class ServiceError : public std::runtime_error {
public:
    ServiceError(Errc kind, const std::string& what, json detail = json::object())
        : std::runtime_error(what), kind_(kind), detail_(std::move(detail)) {}

    Errc kind() const noexcept { return kind_; }
    int status() const noexcept { return http_status(kind_); }

    json body() const {
        json j{{"error", std::string(to_string(kind_))}, {"message", what()}};
        for (const auto& [k, v] : detail_.items()) j[k] = v;
        return j;
    }

private:
    Errc kind_;
    json detail_;
};

inline std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

/// 128-bit random identifier rendered as 32 lowercase hex digits.
inline std::string random_id() {
    static std::mutex mu;
    static std::mt19937_64 rng{[] {
        std::random_device rd;
        std::seed_seq seq{rd(), rd(), rd(), rd(), rd(), rd(), rd(), rd()};
        return std::mt19937_64(seq);
    }()};
    std::lock_guard lock(mu);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (int w = 0; w < 2; ++w) {
        std::uint64_t x = rng();
        for (int i = 0; i < 16; ++i, x >>= 4) out += digits[x & 0xF];
    }
    return out;
}

inline bool is_id(const std::string& s) {
    return s.size() == 32 && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

inline bool is_plain_file_name(const std::string& name) {
    if (name.empty() || name.size() > 255 || name == "." || name == ".." || name.front() == '.') return false;
    for (unsigned char c : name)
        if (c < 0x20 || c == '/' || c == '\\' || c == 0x7F) return false;
    return true;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const fs::path& p, const std::string& bytes) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, p);
}

inline void append_line(const fs::path& p, const std::string& line) {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    std::string buf = line + "\n";
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot append to '" + p.string() + "'");
}

// ---------------------------------------------------------------------------

/// Read-only set of tutor-ready graphs loaded from `*.brd.xml` files.
class ProblemLibrary {
public:
    ProblemLibrary() = default;

    explicit ProblemLibrary(const fs::path& dir) {
        if (!fs::is_directory(dir)) throw ConfigError("problem directory '" + dir.string() + "' does not exist");
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(dir)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && name.size() > 8 && name.ends_with(".brd.xml")) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            std::shared_ptr<const BehaviorGraph> g;
            try {
                g = std::make_shared<const BehaviorGraph>(parse_graph(read_file(f)));
            } catch (const GraphError& e) {
                throw ConfigError(f.string() + ": " + e.what());
            }
            if (has_errors(validate_graph(*g)))
                throw ConfigError("graph '" + f.string() + "' is not tutor-ready (run `gatutor validate`)");
            if (!graphs_.emplace(g->id, g).second) throw ConfigError("duplicate graph id '" + g->id + "'");
        }
    }

    std::shared_ptr<const BehaviorGraph> find(const std::string& id) const {
        auto it = graphs_.find(id);
        return it == graphs_.end() ? nullptr : it->second;
    }

    std::vector<const BehaviorGraph*> all() const {
        std::vector<const BehaviorGraph*> out;
        for (const auto& [id, g] : graphs_) out.push_back(g.get());
        return out;
    }

private:
    std::map<std::string, std::shared_ptr<const BehaviorGraph>> graphs_;
};

struct UploadedFile {
    std::string name;
    std::string path;  // relative to the data directory
};

class TutorService {
public:
    explicit TutorService(ServiceConfig cfg) : cfg_(std::move(cfg)) {
        validate_config(cfg_);
        library_ = ProblemLibrary(cfg_.problems());
        fs::create_directories(cfg_.data_dir / "sessions");
        fs::create_directories(cfg_.data_dir / "results");
    }

    const ServiceConfig& config() const { return cfg_; }
    const ProblemLibrary& library() const { return library_; }

    json list_problems(const std::optional<std::string>& session_id = std::nullopt) {
        json items = json::array();
        for (const auto* g : library_.all()) {
            json skills = json::array();
            for (const auto& s : g->skills) skills.push_back(s.name);
            items.push_back({{"id", g->id}, {"title", g->title}, {"steps", g->correct_link_count()}, {"skills", skills}});
        }
        json out{{"problems", items}};
        if (session_id) {
            auto s = session(*session_id);
            std::shared_lock lock(s->mu);
            out["recommended"] = select_next_problem(s->mastery, library_.all(), cfg_.mastery_threshold);
        }
        return out;
    }

    json create_session(const std::string& graph_id) {
        auto graph = library_.find(graph_id);
        if (!graph) throw ServiceError(Errc::UnknownGraph, "no problem with id '" + graph_id + "'");

        auto s = std::make_shared<Session>();
        s->id = random_id();
        s->graph_id = graph_id;
        s->created_at = now_ms();
        s->trace = start_trace(graph);
        s->mastery = init_mastery(*graph);
        fs::create_directories(session_dir(s->id) / "files");
        append_line(session_dir(s->id) / "events.jsonl",
                    json{{"type", "created"}, {"session_id", s->id}, {"graph_id", graph_id}, {"timestamp", s->created_at}}.dump());
        std::ofstream(session_dir(s->id) / "transactions.jsonl", std::ios::app);
        write_snapshot(*s);
        json view = describe(*s);
        std::lock_guard lock(sessions_mu_);
        sessions_[s->id] = s;
        return view;
    }

    json get_session(const std::string& id) {
        auto s = session(id);
        std::shared_lock lock(s->mu);
        return describe(*s);
    }

    json post_transaction(const std::string& id, Transaction txn) {
        auto s = session(id);
        std::unique_lock lock(s->mu);
        txn.timestamp = now_ms();
        if (is_done(s->trace)) {
            reject(*s, "transaction", Errc::SessionDone);
            throw ServiceError(Errc::SessionDone, "session is already complete");
        }
        auto [trace_after, verdict] = trace(s->trace, txn);
        SkillMastery mastery_after = apply_verdict(s->mastery, *s->trace.graph, verdict);

        json event = to_json(txn);
        event["type"] = "transaction";
        append_line(session_dir(s->id) / "events.jsonl", event.dump());
        append_line(session_dir(s->id) / "transactions.jsonl", to_json(txn).dump());
        s->trace = std::move(trace_after);
        s->mastery = std::move(mastery_after);
        write_snapshot(*s);

        json out{{"verdict", to_json(verdict)}, {"done", is_done(s->trace)}, {"mastery", to_json(s->mastery)}};
        const GraphLink* next = hint_target(s->trace);
        out["next_link"] = next ? json(next->id) : json(nullptr);
        return out;
    }

    HintResponse get_hint(const std::string& id) {
        auto s = session(id);
        std::unique_lock lock(s->mu);
        if (!cfg_.hints_enabled) {
            reject(*s, "hint", Errc::HintsDisabled);
            throw ServiceError(Errc::HintsDisabled, "hints are disabled on this server");
        }
        if (is_done(s->trace)) {
            reject(*s, "hint", Errc::AlreadyDone);
            throw ServiceError(Errc::AlreadyDone, "session is already complete");
        }
        auto [trace_after, hint] = request_hint(s->trace);
        append_line(session_dir(s->id) / "events.jsonl",
                    json{{"type", "hint"}, {"target_link", hint.target_link}, {"level", hint.level}, {"timestamp", now_ms()}}.dump());
        s->trace = std::move(trace_after);
        write_snapshot(*s);
        return hint;
    }

    UploadedFile upload_file(const std::string& id, const std::string& name, const std::string& bytes) {
        auto s = session(id);
        std::unique_lock lock(s->mu);
        if (!is_plain_file_name(name)) {
            reject(*s, "upload", Errc::BadRequest);
            throw ServiceError(Errc::BadRequest, "invalid file name '" + name + "'");
        }
        for (const auto& f : s->files) {
            if (f.name == name) {
                reject(*s, "upload", Errc::DuplicateName);
                throw ServiceError(Errc::DuplicateName, "a file named '" + name + "' was already uploaded");
            }
        }
        try {
            adjacency::parse_refseq_tab(bytes);
        } catch (const adjacency::AdjacencyError& e) {
            reject(*s, "upload", Errc::ParseError);
            throw ServiceError(Errc::ParseError, e.what(),
                               {{"kind", std::string(adjacency::to_string(e.kind()))}, {"line", e.line()}});
        }
        UploadedFile f{name, (fs::path("sessions") / s->id / "files" / name).generic_string()};
        write_file_atomic(cfg_.data_dir / f.path, bytes);
        append_line(session_dir(s->id) / "events.jsonl",
                    json{{"type", "upload"}, {"name", f.name}, {"path", f.path}, {"timestamp", now_ms()}}.dump());
        s->files.push_back(f);
        write_snapshot(*s);
        return f;
    }

    std::string process_files(const std::string& id, std::optional<std::int64_t> gap_threshold = std::nullopt) {
        auto s = session(id);
        std::unique_lock lock(s->mu);
        if (s->files.empty()) {
            reject(*s, "process", Errc::NoFiles);
            throw ServiceError(Errc::NoFiles, "no files have been uploaded");
        }
        if (gap_threshold && *gap_threshold < 0) {
            reject(*s, "process", Errc::BadRequest);
            throw ServiceError(Errc::BadRequest, "gap_threshold must be >= 0");
        }
        std::vector<std::string> paths;
        for (const auto& f : s->files) paths.push_back((cfg_.data_dir / f.path).string());
        auto analysis = analyze_files(paths, gap_threshold.value_or(cfg_.gap_threshold), cfg_.min_match_length);

        std::string result_id = random_id();
        write_file_atomic(result_path(result_id, false), adjacency::export_report(analysis));
        write_file_atomic(result_path(result_id, true), adjacency::export_records(analysis));
        append_line(session_dir(s->id) / "events.jsonl",
                    json{{"type", "process"}, {"result_id", result_id}, {"timestamp", now_ms()}}.dump());
        s->result_id = result_id;
        write_snapshot(*s);
        return result_id;
    }

    std::string get_result(const std::string& result_id, bool records = false) const {
        fs::path p = is_id(result_id) ? result_path(result_id, records) : fs::path();
        if (p.empty() || !fs::is_regular_file(p))
            throw ServiceError(Errc::UnknownResult, "no result with id '" + result_id + "'");
        return read_file(p);
    }

    SkillMastery get_skills(const std::string& id) {
        auto s = session(id);
        std::shared_lock lock(s->mu);
        return s->mastery;
    }

    /// Drops in-memory sessions; the next access rebuilds them from disk.
    void forget_sessions() {
        std::lock_guard lock(sessions_mu_);
        sessions_.clear();
    }

    static adjacency::Analysis analyze_files(const std::vector<std::string>& paths, std::int64_t gap_threshold,
                                             std::size_t min_match_length) {
        std::vector<adjacency::GeneRecord> records;
        for (const auto& p : paths) {
            auto part = adjacency::parse_refseq_tab(read_file(p));
            records.insert(records.end(), part.begin(), part.end());
        }
        adjacency::AnalysisOptions opts;
        opts.gap_threshold = gap_threshold;
        opts.min_match_length = min_match_length;
        return adjacency::analyze(records, opts);
    }

private:
    struct Session {
        mutable std::shared_mutex mu;
        std::string id;
        std::string graph_id;
        std::int64_t created_at = 0;
        TraceState trace;
        SkillMastery mastery;
        std::vector<UploadedFile> files;
        std::optional<std::string> result_id;
    };

    ServiceConfig cfg_;
    ProblemLibrary library_;
    std::mutex sessions_mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;

    fs::path session_dir(const std::string& id) const { return cfg_.data_dir / "sessions" / id; }

    fs::path result_path(const std::string& id, bool records) const {
        return cfg_.data_dir / "results" / (id + (records ? ".tsv" : ".txt"));
    }

    std::shared_ptr<Session> session(const std::string& id) {
        std::lock_guard lock(sessions_mu_);
        if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
        if (!is_id(id) || !fs::is_regular_file(session_dir(id) / "events.jsonl"))
            throw ServiceError(Errc::UnknownSession, "no session with id '" + id + "'");
        auto s = rebuild(id);
        sessions_[id] = s;
        return s;
    }

    // Replays the event log. A torn final line (crash mid-append) is ignored.
    std::shared_ptr<Session> rebuild(const std::string& id) {
        std::ifstream in(session_dir(id) / "events.jsonl");
        std::vector<std::string> lines;
        for (std::string line; std::getline(in, line);)
            if (!line.empty()) lines.push_back(line);

        auto s = std::make_shared<Session>();
        s->id = id;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            json e = json::parse(lines[i], nullptr, false);
            if (e.is_discarded()) {
                if (i + 1 == lines.size()) break;
                throw std::runtime_error("corrupt event log for session " + id);
            }
            const std::string type = e.value("type", "");
            if (type == "created") {
                s->graph_id = e.at("graph_id").get<std::string>();
                s->created_at = e.at("timestamp").get<std::int64_t>();
                auto graph = library_.find(s->graph_id);
                if (!graph) throw ServiceError(Errc::UnknownGraph, "session graph '" + s->graph_id + "' is not loaded");
                s->trace = start_trace(graph);
                s->mastery = init_mastery(*graph);
            } else if (type == "transaction") {
                auto [t, v] = trace(s->trace, transaction_from_json(e));
                s->mastery = apply_verdict(s->mastery, *s->trace.graph, v);
                s->trace = std::move(t);
            } else if (type == "hint") {
                s->trace = request_hint(s->trace).first;
            } else if (type == "upload") {
                s->files.push_back({e.at("name").get<std::string>(), e.at("path").get<std::string>()});
            } else if (type == "process") {
                s->result_id = e.at("result_id").get<std::string>();
            }
        }
        if (!s->trace.graph) throw std::runtime_error("event log for session " + id + " has no creation record");
        return s;
    }

    void reject(const Session& s, const char* op, Errc kind) {
        append_line(session_dir(s.id) / "events.jsonl",
                    json{{"type", "rejected"}, {"op", op}, {"error", std::string(to_string(kind))}, {"timestamp", now_ms()}}.dump());
    }

    json describe(const Session& s) const {
        json files = json::array();
        for (const auto& f : s.files) files.push_back({{"name", f.name}, {"path", f.path}});
        json j{{"session_id", s.id}, {"graph_id", s.graph_id}, {"created_at", s.created_at}};
        j["trace"] = to_json(s.trace);
        j["done"] = is_done(s.trace);
        j["mastery"] = to_json(s.mastery);
        j["uploaded_files"] = files;
        j["result_id"] = s.result_id ? json(*s.result_id) : json(nullptr);
        const GraphLink* next = hint_target(s.trace);
        j["next_link"] = next ? json(next->id) : json(nullptr);
        j["last_verdict"] = s.trace.history.empty() ? json(nullptr) : to_json(s.trace.history.back().second);
        return j;
    }

    void write_snapshot(const Session& s) const {
        write_file_atomic(session_dir(s.id) / "session.json", describe(s).dump(2) + "\n");
    }
};

}  // namespace gatutor::service
