#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace embshift {

// Cumulative node -> vector table for one timestamp. Nodes never leave the
// table once present; vectors of nodes outside updated_this_round carry the
// previous snapshot's values bit-for-bit.
struct EmbeddingSnapshot {
    int timestamp_index = 0;
    int dim = 0;
    bool smoothed = false;
    std::map<std::string, std::vector<double>> vectors;          // input ("word")
    std::map<std::string, std::vector<double>> context_vectors;  // output
    std::set<std::string> updated_this_round;

    bool has(const std::string &node) const { return vectors.count(node) > 0; }
    const std::vector<double> &vec(const std::string &node) const;
    std::size_t node_count() const { return vectors.size(); }
};

// Text format, header `timestamp_index dim node_count [smoothed]`, then one
// row per node: `node_id v0 ... v{d-1}` with 17 significant digits (exact
// double round-trip). Optional `#context <n>` and `#updated <n>` sections
// follow; loaders tolerate their absence.
void save_snapshot(const std::filesystem::path &path,
                   const EmbeddingSnapshot &snapshot);
EmbeddingSnapshot load_snapshot(const std::filesystem::path &path);

}  // namespace embshift
