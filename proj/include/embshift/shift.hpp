#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "embshift/embedding.hpp"

namespace embshift {

enum class ShiftMetric { magnitude, cosine };

// Per-node shift values aligned to the global timestamp axis. Entries where
// the node did not exist at both t and t - delta_t are NaN.
struct ShiftSeries {
    std::string node_id;
    ShiftMetric metric = ShiftMetric::magnitude;
    int delta_t = 1;
    std::vector<double> values;

    bool defined(std::size_t t) const;
};

struct NeighborhoodSnapshot {
    std::string node_id;
    int timestamp_index = 0;
    int k = 0;
    std::vector<std::pair<std::string, double>> neighbors;  // similarity desc
};

// ||v_t - v_prev||_2.
double delta_magnitude(std::span<const double> v_t, std::span<const double> v_prev);

// 1 - cos(v_t, v_prev), in [0, 2]. Bit-identical vectors give exactly 0.
// Throws DataError on a zero vector (degenerate embedding).
double delta_cosine(std::span<const double> v_t, std::span<const double> v_prev);

// Exact top-k by cosine similarity over the whole snapshot, query excluded.
// Ties break by node id for determinism.
NeighborhoodSnapshot topk_neighbors(const EmbeddingSnapshot &snapshot,
                                    const std::string &node_id, int k);

// Per-node series of the metric between snapshots t and t - delta_t.
std::map<std::string, ShiftSeries> shift_series(
    std::span<const EmbeddingSnapshot> snapshots, ShiftMetric metric,
    int delta_t);

// argmax_t of each node's magnitude shift normalized by the per-timestamp
// total over all nodes; ties break toward the earliest t. Nodes whose series
// is all-zero or all-undefined are omitted (counted in *omitted if given).
std::map<std::string, int> max_shift_month(
    const std::map<std::string, ShiftSeries> &magnitude_series,
    std::size_t *omitted = nullptr);

// Mean over eligible nodes of |topk_t intersect topk_{t-dt}| / k_used at each
// timestamp t >= delta_t; NaN where undefined. Nodes born after t - delta_t
// are excluded.
std::vector<double> neighborhood_overlap(
    std::span<const EmbeddingSnapshot> snapshots, int k, int delta_t);

struct OverlapRow {
    int t;
    int k;
    int delta_t;
    double overlap;
};

// Batch evaluation over a (k, delta_t) grid; top-k lists are computed once
// per timestamp at max(k) and sliced.
std::vector<OverlapRow> overlap_curves(std::span<const EmbeddingSnapshot> snapshots,
                                       std::span<const int> k_list,
                                       std::span<const int> dt_list);

struct CategoryMix {
    std::map<std::string, double> top_fraction;
    std::map<std::string, double> base_fraction;
};

// Category distribution among the n_top nodes ranked by cosine shift at t,
// next to the base-rate distribution over all ranked nodes. `eligible`, when
// non-empty, restricts the ranked universe (frequency trimming hook).
CategoryMix top_shifting_category_mix(
    const std::map<std::string, ShiftSeries> &cosine_series, std::size_t t,
    std::size_t n_top, const std::map<std::string, std::string> &categories,
    const std::set<std::string> &eligible = {});

}  // namespace embshift
