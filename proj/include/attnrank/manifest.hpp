#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace attnrank {

/// Record of one CLI run: enough to reproduce it. Written atomically
/// (temp file + rename) when the run finishes.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;  // ordered key/value snapshot
    uint64_t seed = 0;
    std::vector<std::string> input_paths;
    std::vector<std::string> output_paths;
    std::string tool_version;
    double wall_clock_seconds = 0.0;
};

void save_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace attnrank
