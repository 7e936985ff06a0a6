#pragma once

// Run manifest: every CLI invocation that succeeds records what ran, with
// which configuration, and when, so results directories are self-describing.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "intentsim/error.hpp"
#include "intentsim/rng.hpp"
#include "intentsim/version.hpp"

namespace intentsim {

inline std::string iso8601_utc(std::time_t t) {
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

inline std::string config_digest(const nlohmann::json& config) {
    const std::string text = config.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    bool seed_overridden = false;
    bool deterministic = false;
    std::string out_dir;
    std::time_t started_at = 0;
    std::time_t finished_at = 0;
};

inline void write_manifest(const RunManifest& m) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["command"] = m.command;
    j["config"] = m.config;
    j["config_digest"] = config_digest(m.config);
    j["seed"] = m.seed;
    j["seed_overridden"] = m.seed_overridden;
    j["deterministic"] = m.deterministic;
    j["out_dir"] = m.out_dir;
    j["started_at"] = iso8601_utc(m.started_at);
    j["finished_at"] = iso8601_utc(m.finished_at);
    std::filesystem::create_directories(m.out_dir);
    std::ofstream out(std::filesystem::path(m.out_dir) / "manifest.json");
    if (!out) throw SimError("cannot write manifest in " + m.out_dir);
    out << j.dump(2) << "\n";
}

}  // namespace intentsim
