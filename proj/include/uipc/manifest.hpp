#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace uipc {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a-64 over the raw bytes, rendered as 16 hex digits.
std::string bytes_fingerprint(std::string_view bytes);
std::string file_fingerprint(const std::string& path);

// One manifest per CLI run; re-running with the same config and inputs
// reproduces the same outputs.
struct RunManifest {
    std::string subcommand;
    nlohmann::json config;
    std::map<std::string, std::string> input_fingerprints;  // path -> hash
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    std::vector<std::string> outputs;
};

void write_run_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace uipc
