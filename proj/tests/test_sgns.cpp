#include <doctest.h>

#include <cmath>
#include <vector>

#include "embshift/errors.hpp"
#include "embshift/rng.hpp"
#include "embshift/sgns.hpp"

using namespace embshift;

namespace {

SnapshotWindow win(int i) { return SnapshotWindow{i, i * 100, (i + 1) * 100}; }

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_CASE("loss matches closed forms") {
    std::vector<double> a = {1, 2, 0.5};
    std::vector<double> zero = {0, 0, 0};
    CHECK(sgns_loss(a, zero, true) == doctest::Approx(std::log(2.0)));
    CHECK(sgns_loss(a, zero, false) == doctest::Approx(std::log(2.0)));

    //  -log sigma(10) = log(1 + e^-10)
    std::vector<double> u = {10, 0, 0};
    std::vector<double> e1 = {1, 0, 0};
    CHECK(sgns_loss(u, e1, true) ==
          doctest::Approx(std::log1p(std::exp(-10.0))).epsilon(1e-12));
    CHECK(sgns_loss(u, e1, true) == doctest::Approx(4.5398899216870535e-05));

    CHECK(sigmoid_clamped(0.0) == 0.5);
    CHECK(sigmoid_clamped(1000.0) == doctest::Approx(1.0 / (1.0 + std::exp(-30.0))));
    CHECK(sigmoid_clamped(-1000.0) == doctest::Approx(1.0 / (1.0 + std::exp(30.0))));
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(31337);
    const double h = 1e-6;
    for (int draw = 0; draw < 100; ++draw) {
        int d = 2 + static_cast<int>(rng.index(6));
        std::vector<double> a(d), b(d);
        for (int i = 0; i < d; ++i) {
            a[i] = rng.uniform(-2.0, 2.0);
            b[i] = rng.uniform(-2.0, 2.0);
        }
        bool positive = rng.index(2) == 0;
        auto [ga, gb] = sgns_gradient(a, b, positive);
        for (int i = 0; i < d; ++i) {
            auto ap = a, am = a;
            ap[i] += h;
            am[i] -= h;
            double num = (sgns_loss(ap, b, positive) - sgns_loss(am, b, positive)) /
                         (2 * h);
            double denom = std::max({std::abs(num), std::abs(ga[i]), 1e-8});
            CHECK(std::abs(ga[i] - num) / denom < 1e-4);

            auto bp = b, bm = b;
            bp[i] += h;
            bm[i] -= h;
            num = (sgns_loss(a, bp, positive) - sgns_loss(a, bm, positive)) /
                  (2 * h);
            denom = std::max({std::abs(num), std::abs(gb[i]), 1e-8});
            CHECK(std::abs(gb[i] - num) / denom < 1e-4);
        }
    }
}

TEST_CASE("training is deterministic for a fixed seed") {
    PairMultiset pairs;
    pairs.window = win(0);
    Rng rng(5);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            if (rng.index(2) == 0)
                pairs.add("n" + std::to_string(i), "n" + std::to_string(j),
                          1 + static_cast<std::int64_t>(rng.index(5)));
    TrainConfig cfg;
    cfg.dim = 8;
    cfg.epochs = 3;
    cfg.rng_seed = 77;
    EmbeddingSnapshot s1 = train_snapshot(pairs, nullptr, cfg);
    EmbeddingSnapshot s2 = train_snapshot(pairs, nullptr, cfg);
    CHECK(s1.vectors == s2.vectors);
    CHECK(s1.context_vectors == s2.context_vectors);

    cfg.rng_seed = 78;
    EmbeddingSnapshot s3 = train_snapshot(pairs, nullptr, cfg);
    CHECK(s1.vectors != s3.vectors);
}

TEST_CASE("nodes absent from a window keep vectors bit-for-bit") {
    TrainConfig cfg;
    cfg.dim = 6;
    cfg.epochs = 2;
    cfg.rng_seed = 3;

    PairMultiset w0;
    w0.window = win(0);
    w0.add("frozen1", "frozen2", 4);
    w0.add("frozen1", "live1", 2);
    EmbeddingSnapshot s0 = train_snapshot(w0, nullptr, cfg);

    // frozen1/frozen2 never appear again
    PairMultiset w1;
    w1.window = win(1);
    w1.add("live1", "live2", 3);
    EmbeddingSnapshot s1 = train_snapshot(w1, &s0, cfg);

    PairMultiset w2;
    w2.window = win(2);
    w2.add("live2", "live3", 5);
    w2.add("live1", "live3", 1);
    EmbeddingSnapshot s2 = train_snapshot(w2, &s1, cfg);

    for (const auto &node : {"frozen1", "frozen2"}) {
        CHECK(s1.vec(node) == s0.vec(node));
        CHECK(s2.vec(node) == s0.vec(node));
        CHECK(s2.updated_this_round.count(node) == 0);
    }
    CHECK(s2.updated_this_round.count("live3") == 1);
    // cumulative node space grows monotonically
    CHECK(s0.node_count() == 3);
    CHECK(s1.node_count() == 4);
    CHECK(s2.node_count() == 5);
}

TEST_CASE("training pulls co-occurring nodes together") {
    // two 4-cliques with no cross edges; after training, intra-clique dot
    // products should exceed inter-clique ones on average
    PairMultiset pairs;
    pairs.window = win(0);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                pairs.add("c" + std::to_string(c) + "_" + std::to_string(i),
                          "c" + std::to_string(c) + "_" + std::to_string(j), 40);
    TrainConfig cfg;
    cfg.dim = 12;
    cfg.epochs = 40;
    cfg.rng_seed = 11;
    EmbeddingSnapshot snap = train_snapshot(pairs, nullptr, cfg);

    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    std::vector<std::string> ids(snap.updated_this_round.begin(),
                                 snap.updated_this_round.end());
    for (std::size_t i = 0; i < ids.size(); ++i)
        for (std::size_t j = i + 1; j < ids.size(); ++j) {
            double d = dot(snap.vec(ids[i]), snap.vec(ids[j]));
            if (ids[i][1] == ids[j][1]) {
                intra += d;
                ++n_intra;
            } else {
                inter += d;
                ++n_inter;
            }
        }
    CHECK(intra / n_intra > inter / n_inter);
    CHECK(intra / n_intra > 0.5);
}

TEST_CASE("chain_train assigns timestamp indices and validates config") {
    std::vector<PairMultiset> seq(3);
    for (int t = 0; t < 3; ++t) {
        seq[t].window = win(t);
        seq[t].add("a", "b", 2);
    }
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.epochs = 1;
    auto snaps = chain_train(seq, cfg);
    REQUIRE(snaps.size() == 3);
    for (int t = 0; t < 3; ++t) {
        CHECK(snaps[t].timestamp_index == t);
        CHECK(snaps[t].dim == 4);
    }

    TrainConfig bad;
    bad.dim = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = TrainConfig{};
    bad.learning_rate = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
