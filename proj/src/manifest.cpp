#include "embshift/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embshift/errors.hpp"

namespace embshift {

using nlohmann::json;

std::uint64_t fnv1a_hash(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string() + " for hashing");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hash(buf.str());
}

std::string hash_hex(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void StageManifest::save(const std::filesystem::path &path) const {
    json j;
    j["stage"] = stage;
    j["version"] = version;
    j["config_hash"] = config_hash;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

StageManifest StageManifest::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json j;
    in >> j;
    StageManifest m;
    m.stage = j.at("stage");
    m.version = j.value("version", "");
    m.config_hash = j.value("config_hash", "");
    m.inputs = j.value("inputs", std::map<std::string, std::string>{});
    m.outputs = j.value("outputs", std::map<std::string, std::string>{});
    return m;
}

}  // namespace embshift
