#include "embshift/sgns.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "embshift/errors.hpp"
#include "embshift/rng.hpp"

namespace embshift {

void TrainConfig::validate() const {
    if (dim < 2) throw ConfigError("TrainConfig.dim must be >= 2");
    if (negatives_per_positive < 1)
        throw ConfigError("TrainConfig.negatives_per_positive must be >= 1");
    if (learning_rate <= 0) throw ConfigError("TrainConfig.learning_rate must be > 0");
    if (epochs < 0) throw ConfigError("TrainConfig.epochs must be >= 0");
    if (pair_count_cap < 1) throw ConfigError("TrainConfig.pair_count_cap must be >= 1");
    if (threads < 1) throw ConfigError("TrainConfig.threads must be >= 1");
}

double sigmoid_clamped(double x) {
    x = std::clamp(x, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-x));
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

double sgns_loss(std::span<const double> a, std::span<const double> b,
                 bool positive) {
    double d = dot(a, b);
    return -std::log(sigmoid_clamped(positive ? d : -d));
}

std::pair<std::vector<double>, std::vector<double>> sgns_gradient(
    std::span<const double> a, std::span<const double> b, bool positive) {
    if (a.size() != b.size()) throw DataError("sgns_gradient: dimension mismatch");
    const double y = positive ? 1.0 : 0.0;
    const double g = sigmoid_clamped(dot(a, b)) - y;
    std::vector<double> ga(a.size()), gb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        ga[i] = g * b[i];
        gb[i] = g * a[i];
    }
    return {std::move(ga), std::move(gb)};
}

namespace {

// Dense training state over this window's node universe.
struct Workspace {
    int dim;
    std::vector<std::string> nodes;              // sorted
    std::vector<double> input;                   // n * dim
    std::vector<double> context;                 // n * dim
    std::vector<double> negative_cdf;            // cumulative, normalized
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::vector<std::uint32_t> visits;           // pair indices, weight-expanded

    double *in(std::size_t i) { return input.data() + i * dim; }
    double *ctx(std::size_t i) { return context.data() + i * dim; }

    std::size_t sample_negative(Rng &rng) const {
        double u = rng.uniform();
        auto it = std::upper_bound(negative_cdf.begin(), negative_cdf.end(), u);
        if (it == negative_cdf.end()) --it;
        return static_cast<std::size_t>(it - negative_cdf.begin());
    }
};

// One skip-gram step: center u against positive context w plus k negatives.
void train_step(Workspace &ws, std::size_t u, std::size_t w, int k, double lr,
                Rng &rng, std::vector<double> &grad_center) {
    const int d = ws.dim;
    double *vu = ws.in(u);
    std::fill(grad_center.begin(), grad_center.end(), 0.0);
    for (int target = 0; target <= k; ++target) {
        std::size_t t;
        double label;
        if (target == 0) {
            t = w;
            label = 1.0;
        } else {
            t = ws.sample_negative(rng);
            if (t == u || t == w) continue;
            label = 0.0;
        }
        double *ct = ws.ctx(t);
        double f = sigmoid_clamped(dot({vu, vu + d}, {ct, ct + d}));
        double g = (label - f) * lr;
        for (int i = 0; i < d; ++i) {
            grad_center[i] += g * ct[i];
            ct[i] += g * vu[i];
        }
    }
    for (int i = 0; i < d; ++i) vu[i] += grad_center[i];
}

}  // namespace

EmbeddingSnapshot train_snapshot(const PairMultiset &pairs,
                                 const EmbeddingSnapshot *prev,
                                 const TrainConfig &config) {
    config.validate();
    if (prev && prev->dim != config.dim)
        throw ConfigError("dimension mismatch: prev snapshot has dim " +
                          std::to_string(prev->dim) + ", config asks for " +
                          std::to_string(config.dim));

    EmbeddingSnapshot out;
    if (prev) out = *prev;
    out.timestamp_index = pairs.window.index;
    out.dim = config.dim;
    out.smoothed = false;
    out.updated_this_round.clear();
    if (pairs.counts.empty()) return out;

    const int d = config.dim;
    Rng init_rng(mix_seed(config.rng_seed, static_cast<std::uint64_t>(
                                               pairs.window.index)));

    Workspace ws;
    ws.dim = d;
    for (const auto &node : pairs.nodes()) ws.nodes.push_back(node);
    const std::size_t n = ws.nodes.size();
    ws.input.resize(n * d);
    ws.context.resize(n * d);
    std::map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string &node = ws.nodes[i];
        index[node] = static_cast<std::uint32_t>(i);
        auto it = out.vectors.find(node);
        if (it != out.vectors.end()) {
            std::copy(it->second.begin(), it->second.end(), ws.in(i));
            auto ct = out.context_vectors.find(node);
            if (ct != out.context_vectors.end())
                std::copy(ct->second.begin(), ct->second.end(), ws.ctx(i));
        } else {
            for (int j = 0; j < d; ++j)
                ws.in(i)[j] = (init_rng.uniform() - 0.5) / d;
            // context stays zero
        }
    }

    {
        auto weights = pairs.node_weights();
        ws.negative_cdf.resize(n);
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += std::pow(static_cast<double>(weights[ws.nodes[i]]),
                            config.negative_exponent);
            ws.negative_cdf[i] = acc;
        }
        for (double &x : ws.negative_cdf) x /= acc;
    }

    for (const auto &[key, count] : pairs.counts) {
        auto pair_index = static_cast<std::uint32_t>(ws.pairs.size());
        ws.pairs.emplace_back(index[key.first], index[key.second]);
        auto reps = std::min<std::int64_t>(count, config.pair_count_cap);
        ws.visits.insert(ws.visits.end(), static_cast<std::size_t>(reps),
                         pair_index);
    }

    const double total_steps =
        static_cast<double>(ws.visits.size()) * std::max(config.epochs, 1);
    Rng shuffle_rng(mix_seed(config.rng_seed, 0x5741'0000ULL + pairs.window.index));

    auto run_range = [&](std::size_t begin, std::size_t end, std::size_t done,
                         Rng rng) {
        std::vector<double> grad(d);
        for (std::size_t v = begin; v < end; ++v) {
            double frac = static_cast<double>(done + v) / total_steps;
            double lr = std::max(config.min_learning_rate,
                                 config.learning_rate * (1.0 - frac));
            auto [a, b] = ws.pairs[ws.visits[v]];
            train_step(ws, a, b, config.negatives_per_positive, lr, rng, grad);
            train_step(ws, b, a, config.negatives_per_positive, lr, rng, grad);
        }
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Fisher-Yates with the fixed-mapping rng keeps visit order reproducible.
        for (std::size_t i = ws.visits.size(); i > 1; --i)
            std::swap(ws.visits[i - 1], ws.visits[shuffle_rng.index(i)]);

        const std::size_t done = static_cast<std::size_t>(epoch) * ws.visits.size();
        if (config.threads == 1) {
            run_range(0, ws.visits.size(), done,
                      Rng(mix_seed(config.rng_seed,
                                   0x4e45'0000ULL + pairs.window.index * 131 + epoch)));
        } else {
            // Lock-free asynchronous updates: not bit-reproducible, but every
            // invariant other than determinism still holds.
            std::vector<std::thread> workers;
            std::size_t chunk = (ws.visits.size() + config.threads - 1) /
                                static_cast<std::size_t>(config.threads);
            for (int t = 0; t < config.threads; ++t) {
                std::size_t begin = chunk * t;
                std::size_t end = std::min(ws.visits.size(), begin + chunk);
                if (begin >= end) break;
                workers.emplace_back(run_range, begin, end, done,
                                     Rng(mix_seed(config.rng_seed,
                                                  0x4e45'0000ULL +
                                                      pairs.window.index * 131 +
                                                      epoch * 7919 + t)));
            }
            for (auto &w : workers) w.join();
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        const std::string &node = ws.nodes[i];
        out.vectors[node].assign(ws.in(i), ws.in(i) + d);
        out.context_vectors[node].assign(ws.ctx(i), ws.ctx(i) + d);
        out.updated_this_round.insert(node);
    }
    return out;
}

std::vector<EmbeddingSnapshot> chain_train(
    const std::vector<PairMultiset> &pair_sequence, const TrainConfig &config) {
    std::vector<EmbeddingSnapshot> out;
    out.reserve(pair_sequence.size());
    const EmbeddingSnapshot *prev = nullptr;
    for (std::size_t t = 0; t < pair_sequence.size(); ++t) {
        try {
            out.push_back(train_snapshot(pair_sequence[t], prev, config));
        } catch (const std::runtime_error &e) {
            throw DataError("window " + std::to_string(t) + ": " + e.what());
        }
        out.back().timestamp_index = static_cast<int>(t);
        prev = &out.back();
    }
    return out;
}

}  // namespace embshift
