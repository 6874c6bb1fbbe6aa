#include "stratiwave/manifest.hpp"

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stratiwave/errors.hpp"

namespace stratiwave {

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a64_hex(ss.str());
}

void write_manifest(const RunManifest& m, const std::string& path) {
    nlohmann::json j;
    j["config_hash"] = m.config_hash;
    j["command"] = m.command;
    j["parameters"] = m.parameters ? *m.parameters : nlohmann::json::object();
    j["outputs"] = m.outputs;
    j["tool_version"] = tool_version;

    // Honor SOURCE_DATE_EPOCH (reproducible-builds convention) so identical
    // runs can produce byte-identical manifests.
    std::time_t tt;
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
        tt = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    } else {
        const auto now = std::chrono::system_clock::now();
        tt = std::chrono::system_clock::to_time_t(now);
    }
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char ts[32];
    std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", &tm);
    j["timestamp"] = ts;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

} // namespace stratiwave
