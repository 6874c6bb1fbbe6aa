#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stratiwave {

inline constexpr const char* tool_version = "0.1.0";

// FNV-1a 64-bit hash, as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

// Hash of a file's raw bytes; throws IoError if unreadable.
std::string file_hash(const std::string& path);

// Provenance record written next to every produced output.  The timestamp is
// the only non-deterministic field of any run.
struct RunManifest {
    std::string config_hash;
    std::string command;
    const nlohmann::json* parameters = nullptr;  // optional, owned by the caller
    std::vector<std::string> outputs;
};

// Writes { config_hash, command, parameters, outputs, timestamp,
// tool_version } as JSON to `path`.
void write_manifest(const RunManifest& m, const std::string& path);

} // namespace stratiwave
