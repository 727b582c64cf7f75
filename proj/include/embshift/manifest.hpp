#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace embshift {

// FNV-1a 64-bit over raw bytes; stable across runs and platforms.
std::uint64_t fnv1a_hash(const std::string &bytes);
std::uint64_t hash_file(const std::filesystem::path &path);
std::string hash_hex(std::uint64_t h);

// Per-stage record of input/output content hashes plus the effective config
// hash, enabling exact reruns.
struct StageManifest {
    std::string stage;
    std::string version;
    std::string config_hash;
    std::map<std::string, std::string> inputs;   // relative path -> hash
    std::map<std::string, std::string> outputs;

    void save(const std::filesystem::path &path) const;
    static StageManifest load(const std::filesystem::path &path);
};

}  // namespace embshift
