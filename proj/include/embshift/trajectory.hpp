#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "embshift/embedding.hpp"

namespace embshift {

struct SmoothOptions {
    bool normalize = true;   // divide per-step diffs by the corpus-mean
                             // magnitude shift at that step, rescale after
    int em_max_iters = 30;
    double em_tol = 1e-6;
    int min_observations = 4;  // shorter trajectories pass through unsmoothed
    int threads = 1;
};

struct SmoothOutcome {
    std::vector<EmbeddingSnapshot> snapshots;   // `smoothed` flag set
    std::set<std::string> passthrough_nodes;    // too few observations
};

// Per-node, per-dimension constant-velocity Kalman smoothing of embedding
// trajectories, EM-fitted independently for each scalar series. Nodes enter
// at their first snapshot; earlier timestamps are not imputed.
SmoothOutcome smooth_embeddings(std::span<const EmbeddingSnapshot> snapshots,
                                const SmoothOptions &options);

struct VelocityVector {
    std::string node_id;
    int timestamp_index = 0;  // >= 1
    std::vector<double> components;
};

// Elementwise difference of consecutive smoothed vectors.
std::vector<VelocityVector> velocity(std::span<const EmbeddingSnapshot> snapshots);

}  // namespace embshift
