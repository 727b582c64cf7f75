#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>

#include "embshift/transactions.hpp"

namespace embshift {

enum class NodeType { merchant, account };

std::string to_string(NodeType t);
NodeType node_type_from_string(const std::string &s);

// Weighted co-occurrence pairs for one snapshot window and one node type.
// Keys are canonicalized: first < second lexicographically.
struct PairMultiset {
    SnapshotWindow window;
    NodeType node_type = NodeType::merchant;
    std::map<std::pair<std::string, std::string>, std::int64_t> counts;

    void add(const std::string &a, const std::string &b, std::int64_t count);

    // Drops pairs below min_count (frequency trimming knob, default no-op).
    void trim(std::int64_t min_count);

    // Sorted unique node ids across all pairs.
    std::set<std::string> nodes() const;

    // Per-node sum of pair counts it participates in.
    std::map<std::string, std::int64_t> node_weights() const;

    std::int64_t total_count() const;
};

// Homogeneous projection of the bipartite window graph through bridge nodes
// of the opposite type. The count for pair (a, b) is the number of length-2
// walks a -> bridge -> b, i.e. sum over bridges of the product of the two
// endpoint transaction counts.
PairMultiset project(std::span<const TransactionRecord> records,
                     NodeType node_type, const SnapshotWindow &window);

// Text serialization: '#' header lines (window bounds, node type), then
// sorted `a<TAB>b<TAB>count` rows. Sorted output keeps files diffable.
void save_pairs(const std::filesystem::path &path, const PairMultiset &pairs);
PairMultiset load_pairs(const std::filesystem::path &path);

}  // namespace embshift
