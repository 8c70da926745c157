#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <unistd.h>

#include "gatutor/behavior_graph.hpp"

namespace gatutor::testing {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(GATUTOR_FIXTURES) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::shared_ptr<const BehaviorGraph> load_fixture_graph(const std::string& name) {
    return std::make_shared<const BehaviorGraph>(parse_graph(slurp(fixture("graphs/" + name))));
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static int counter = 0;
    auto p = std::filesystem::temp_directory_path() /
             ("gatutor-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace gatutor::testing
