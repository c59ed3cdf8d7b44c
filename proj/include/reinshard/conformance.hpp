#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace reinshard::conformance {

struct Section {
    std::uint64_t checked = 0;
    std::uint64_t mismatches = 0;
    std::vector<std::string> details; // first few mismatches
};

struct Report {
    std::map<std::string, Section> sections;

    bool pass() const;
    std::uint64_t checked() const;
};

/// Replays every golden vector (puzzle hashes, VDF inputs and transcripts,
/// leader tickets, both difficulty rules, node ids) through the library.
Report check_vectors(const nlohmann::json& vectors);

Report check_file(const std::string& path);

} // namespace reinshard::conformance
