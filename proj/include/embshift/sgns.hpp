#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "embshift/embedding.hpp"
#include "embshift/projection.hpp"

namespace embshift {

struct TrainConfig {
    int dim = 64;
    int negatives_per_positive = 5;  // k- per positive pair
    int epochs = 5;
    double learning_rate = 0.025;    // linear decay to min_learning_rate
    double min_learning_rate = 1e-4;
    double negative_exponent = 0.75;
    std::int64_t pair_count_cap = 1000;  // visit cap for extreme weights
    std::uint64_t rng_seed = 1;
    int threads = 1;  // 1 = deterministic mode

    void validate() const;
};

// sigma with the pre-activation clamped to [-30, 30].
double sigmoid_clamped(double x);

// -log sigma(a.b) for a positive pair, -log sigma(-a.b) for a negative.
double sgns_loss(std::span<const double> a, std::span<const double> b,
                 bool positive);

// Gradients of sgns_loss wrt both vectors: (sigma(a.b) - y) * other.
std::pair<std::vector<double>, std::vector<double>> sgns_gradient(
    std::span<const double> a, std::span<const double> b, bool positive);

// One round of skip-gram training on this window's pairs, warm-started from
// `prev` when given. Nodes absent from the pairs keep their previous vectors
// bit-for-bit; nodes new to the space get a small random initialization.
// Negatives are drawn from the smoothed unigram distribution over this
// window's nodes only.
EmbeddingSnapshot train_snapshot(const PairMultiset &pairs,
                                 const EmbeddingSnapshot *prev,
                                 const TrainConfig &config);

// Chained warm-start training over chronologically ordered windows. Snapshot
// t holds the union of all nodes seen in windows 0..t.
std::vector<EmbeddingSnapshot> chain_train(
    const std::vector<PairMultiset> &pair_sequence, const TrainConfig &config);

}  // namespace embshift
