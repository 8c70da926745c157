// gatutor: tutoring service and headless tools for the gene adjacency program.

#include <csignal>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gatutor/behavior_graph.hpp"
#include "gatutor/example_tracer.hpp"
#include "gatutor/gene_adjacency.hpp"
#include "gatutor/http_api.hpp"
#include "gatutor/json_codec.hpp"
#include "gatutor/knowledge_tracer.hpp"
#include "gatutor/tutor_service.hpp"

namespace {

using namespace gatutor;

httplib::Server* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

std::shared_ptr<const BehaviorGraph> load_graph(const std::string& path) {
    return std::make_shared<const BehaviorGraph>(parse_graph(service::read_file(path)));
}

int run_serve(const service::ServiceConfig& cfg) {
    service::TutorService svc(cfg);
    httplib::Server srv;
    service::mount(srv, svc);
    int port = cfg.port;
    if (port == 0) port = srv.bind_to_any_port(cfg.host);
    else if (!srv.bind_to_port(cfg.host, port)) port = -1;
    if (port <= 0) {
        std::cerr << "gatutor: cannot bind " << cfg.host << ":" << cfg.port << "\n";
        return 1;
    }
    g_server = &srv;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << cfg.host << ":" << port << std::endl;
    srv.listen_after_bind();
    return 0;
}

int run_validate(const std::string& path) {
    auto diags = validate_graph(*load_graph(path));
    for (const auto& d : diags) std::cout << d.str() << "\n";
    return diags.empty() ? 0 : 1;
}

int run_replay(const std::string& graph_path, const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("cannot read '" + log_path + "'");
    for (const auto& v : replay(load_graph(graph_path), read_transaction_log(in))) {
        std::cout << to_string(v.kind);
        if (v.message) std::cout << "\t" << *v.message;
        std::cout << "\n";
    }
    return 0;
}

int run_matrix(const std::string& path) {
    std::cout << format_skill_matrix(skill_matrix(*load_graph(path)));
    return 0;
}

int run_process(const std::vector<std::string>& files, std::int64_t gap, std::size_t min_len,
                const std::vector<std::string>& patterns, bool records) {
    if (gap < 0 || min_len < 1) {
        std::cerr << "gatutor: --gap-threshold must be >= 0 and --min-match >= 1\n";
        return 2;
    }
    std::vector<adjacency::GeneRecord> all;
    for (const auto& f : files) {
        try {
            auto part = adjacency::parse_refseq_tab(service::read_file(f));
            all.insert(all.end(), part.begin(), part.end());
        } catch (const adjacency::AdjacencyError& e) {
            std::cerr << f << ": " << e.what() << "\n";
            return 2;
        }
    }
    adjacency::AnalysisOptions opts;
    opts.gap_threshold = gap;
    opts.min_match_length = min_len;
    opts.patterns = patterns;
    auto analysis = adjacency::analyze(all, opts);
    std::cout << (records ? adjacency::export_records(analysis) : adjacency::export_report(analysis));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Example-tracing tutor for the gene adjacency program"};
    app.require_subcommand(1);

    service::ServiceConfig cfg;
    std::string data_dir = cfg.data_dir.string(), problems_dir, static_dir;
    auto* serve = app.add_subcommand("serve", "Run the tutoring HTTP service");
    serve->add_option("--host", cfg.host, "Listen address")->envname("GATUTOR_HOST")->capture_default_str();
    serve->add_option("--port", cfg.port, "Listen port (0 picks a free one)")->envname("GATUTOR_PORT")->capture_default_str();
    serve->add_option("--data-dir", data_dir, "Session and result storage")->envname("GATUTOR_DATA_DIR")->capture_default_str();
    serve->add_option("--problems-dir", problems_dir, "Directory of .brd.xml graphs (default <data-dir>/problems)")
        ->envname("GATUTOR_PROBLEMS_DIR");
    serve->add_option("--gap-threshold", cfg.gap_threshold, "Maximum intergenic gap in bp for adjacent genes")
        ->envname("GATUTOR_GAP_THRESHOLD")->capture_default_str();
    serve->add_option("--min-match", cfg.min_match_length, "Minimum shared code length reported between genomes")
        ->envname("GATUTOR_MIN_MATCH")->capture_default_str();
    serve->add_option("--mastery-threshold", cfg.mastery_threshold, "p_know at which a skill counts as mastered")
        ->envname("GATUTOR_MASTERY_THRESHOLD")->capture_default_str();
    bool no_hints = false;
    serve->add_flag("--no-hints", no_hints, "Refuse hint requests")->envname("GATUTOR_NO_HINTS");
    serve->add_option("--static-dir", static_dir, "Serve a browser front end from this directory")->envname("GATUTOR_STATIC_DIR");

    std::string graph_path, log_path;
    auto* validate = app.add_subcommand("validate", "Print authoring diagnostics; exit 1 if there are any");
    validate->add_option("graph", graph_path, "Behavior graph (.brd.xml)")->required();

    auto* replay_cmd = app.add_subcommand("replay", "Trace a transaction log and print one verdict per line");
    replay_cmd->add_option("graph", graph_path, "Behavior graph (.brd.xml)")->required();
    replay_cmd->add_option("log", log_path, "Line-delimited transaction log")->required();

    auto* matrix = app.add_subcommand("matrix", "Print the skill matrix of a graph");
    matrix->add_option("graph", graph_path, "Behavior graph (.brd.xml)")->required();

    std::vector<std::string> files, patterns;
    std::int64_t gap = adjacency::kDefaultGapThreshold;
    std::size_t min_len = adjacency::kDefaultMinMatchLength;
    bool records = false;
    auto* process = app.add_subcommand("process", "Run gene adjacency analysis on .cds.tab files");
    process->add_option("files", files, "Input .cds.tab files")->required();
    process->add_option("--gap-threshold", gap, "Maximum intergenic gap in bp")->envname("GATUTOR_GAP_THRESHOLD")->capture_default_str();
    process->add_option("--min-match", min_len, "Minimum shared code length")->envname("GATUTOR_MIN_MATCH")->capture_default_str();
    process->add_option("--pattern", patterns, "Bit pattern to search for (repeatable)");
    process->add_flag("--records", records, "Emit the tab-separated record format");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve) {
            cfg.data_dir = data_dir;
            cfg.problems_dir = problems_dir;
            cfg.static_dir = static_dir;
            cfg.hints_enabled = !no_hints;
            return run_serve(cfg);
        }
        if (*validate) return run_validate(graph_path);
        if (*replay_cmd) return run_replay(graph_path, log_path);
        if (*matrix) return run_matrix(graph_path);
        if (*process) return run_process(files, gap, min_len, patterns, records);
    } catch (const std::exception& e) {
        std::cerr << "gatutor: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
