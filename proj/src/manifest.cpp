#include "uipc/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uipc/rng.hpp"

namespace uipc {

std::string bytes_fingerprint(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for fingerprinting: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return bytes_fingerprint(os.str());
}

void write_run_manifest(const std::string& dir, const RunManifest& manifest) {
    std::filesystem::create_directories(dir);
    nlohmann::json j;
    j["subcommand"] = manifest.subcommand;
    j["config"] = manifest.config;
    j["inputs"] = manifest.input_fingerprints;
    j["seed"] = manifest.seed;
    j["wall_ms"] = manifest.wall_ms;
    j["outputs"] = manifest.outputs;
    j["tool_version"] = kToolVersion;
    const auto path = std::filesystem::path(dir) / "run_manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace uipc
