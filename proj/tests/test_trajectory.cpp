#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "embshift/errors.hpp"
#include "embshift/rng.hpp"
#include "embshift/trajectory.hpp"

using namespace embshift;

namespace {

EmbeddingSnapshot make_snapshot(
    int t, const std::map<std::string, std::vector<double>> &vectors) {
    EmbeddingSnapshot s;
    s.timestamp_index = t;
    s.dim = static_cast<int>(vectors.begin()->second.size());
    s.vectors = vectors;
    return s;
}

std::vector<EmbeddingSnapshot> noisy_line(int T, int dim, int nodes,
                                          double noise, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EmbeddingSnapshot> snaps;
    std::map<std::string, std::vector<double>> base, slope;
    for (int i = 0; i < nodes; ++i) {
        std::string id = "n" + std::to_string(i);
        std::vector<double> b(dim), s(dim);
        for (int d = 0; d < dim; ++d) {
            b[d] = rng.uniform(-1, 1);
            s[d] = rng.uniform(-0.05, 0.05);
        }
        base[id] = b;
        slope[id] = s;
    }
    for (int t = 0; t < T; ++t) {
        std::map<std::string, std::vector<double>> vecs;
        for (const auto &[id, b] : base) {
            std::vector<double> v(dim);
            for (int d = 0; d < dim; ++d)
                v[d] = b[d] + slope.at(id)[d] * t + noise * rng.uniform(-1, 1);
            vecs[id] = v;
        }
        snaps.push_back(make_snapshot(t, vecs));
    }
    return snaps;
}

}  // namespace

TEST_CASE("constant trajectories come back bit-identical") {
    std::map<std::string, std::vector<double>> vecs = {
        {"a", {0.123456789, -7.5, 0.0}}, {"b", {1e-8, 2.0, 3.0}}};
    std::vector<EmbeddingSnapshot> snaps;
    for (int t = 0; t < 6; ++t) snaps.push_back(make_snapshot(t, vecs));
    SmoothOptions opts;
    SmoothOutcome out = smooth_embeddings(snaps, opts);
    REQUIRE(out.snapshots.size() == 6);
    for (int t = 0; t < 6; ++t) {
        CHECK(out.snapshots[t].smoothed);
        CHECK(out.snapshots[t].vectors == vecs);
    }
    CHECK(out.passthrough_nodes.empty());
}

TEST_CASE("smoothing shrinks jitter around a linear trend") {
    auto snaps = noisy_line(16, 3, 30, 0.08, 77);
    SmoothOptions opts;
    SmoothOutcome out = smooth_embeddings(snaps, opts);

    // compare mean squared second difference (roughness) before and after
    auto roughness = [](const std::vector<EmbeddingSnapshot> &ss) {
        double total = 0;
        int count = 0;
        for (std::size_t t = 2; t < ss.size(); ++t)
            for (const auto &[id, v] : ss[t].vectors) {
                const auto &v1 = ss[t - 1].vec(id);
                const auto &v2 = ss[t - 2].vec(id);
                for (std::size_t d = 0; d < v.size(); ++d) {
                    double dd = v[d] - 2 * v1[d] + v2[d];
                    total += dd * dd;
                    ++count;
                }
            }
        return total / count;
    };
    double before = roughness(snaps);
    double after = roughness(out.snapshots);
    CHECK(after < 0.5 * before);

    // smoothing must not wander far from the observations
    for (std::size_t t = 0; t < snaps.size(); ++t)
        for (const auto &[id, v] : snaps[t].vectors) {
            const auto &w = out.snapshots[t].vec(id);
            for (std::size_t d = 0; d < v.size(); ++d)
                CHECK(std::abs(w[d] - v[d]) < 0.5);
        }
}

TEST_CASE("short trajectories pass through unchanged and are flagged") {
    auto snaps = noisy_line(8, 2, 5, 0.05, 3);
    // node "late" exists only in the last 2 snapshots
    snaps[6].vectors["late"] = {1.0, 2.0};
    snaps[7].vectors["late"] = {1.1, 2.1};
    SmoothOptions opts;
    SmoothOutcome out = smooth_embeddings(snaps, opts);
    REQUIRE(out.passthrough_nodes.count("late") == 1);
    CHECK(out.snapshots[6].vec("late") == std::vector<double>{1.0, 2.0});
    CHECK(out.snapshots[7].vec("late") == std::vector<double>{1.1, 2.1});
}

TEST_CASE("dimensions are smoothed independently") {
    // run 1: a 2-d node; run 2: the same series split into two 1-d nodes.
    // per-dimension smoothing must give identical numbers when
    // normalization is off.
    Rng rng(15);
    std::vector<double> c0(6), c1(6);
    for (int t = 0; t < 6; ++t) {
        c0[t] = 0.1 * t + 0.03 * rng.uniform(-1, 1);
        c1[t] = -0.2 * t + 0.05 * rng.uniform(-1, 1);
    }
    std::vector<EmbeddingSnapshot> joint, split;
    for (int t = 0; t < 6; ++t) {
        joint.push_back(make_snapshot(t, {{"n", {c0[t], c1[t]}}}));
        split.push_back(
            make_snapshot(t, {{"d0", {c0[t]}}, {"d1", {c1[t]}}}));
    }
    SmoothOptions opts;
    opts.normalize = false;
    auto a = smooth_embeddings(joint, opts);
    auto b = smooth_embeddings(split, opts);
    for (int t = 0; t < 6; ++t) {
        CHECK(a.snapshots[t].vec("n")[0] ==
              doctest::Approx(b.snapshots[t].vec("d0")[0]).epsilon(1e-12));
        CHECK(a.snapshots[t].vec("n")[1] ==
              doctest::Approx(b.snapshots[t].vec("d1")[0]).epsilon(1e-12));
    }
}

TEST_CASE("smoothing requires enough snapshots") {
    auto snaps = noisy_line(3, 2, 3, 0.01, 1);
    SmoothOptions opts;
    CHECK_THROWS_AS(smooth_embeddings(snaps, opts), DataError);
}

TEST_CASE("velocity is the elementwise difference of consecutive snapshots") {
    std::vector<EmbeddingSnapshot> snaps;
    snaps.push_back(make_snapshot(0, {{"a", {1.0, 2.0}}}));
    snaps.push_back(make_snapshot(1, {{"a", {1.5, 1.0}}, {"b", {0.0, 0.0}}}));
    snaps.push_back(make_snapshot(
        2, {{"a", {2.0, 1.0}}, {"b", {1.0, -1.0}}}));
    auto v = velocity(snaps);
    REQUIRE(v.size() == 3);  // a@1, a@2, b@2
    std::map<std::pair<std::string, int>, std::vector<double>> got;
    for (const auto &x : v) got[{x.node_id, x.timestamp_index}] = x.components;
    CHECK(got.at({"a", 1}) == std::vector<double>{0.5, -1.0});
    CHECK(got.at({"a", 2}) == std::vector<double>{0.5, 0.0});
    CHECK(got.at({"b", 2}) == std::vector<double>{1.0, -1.0});
    CHECK(got.count({"b", 1}) == 0);
}

TEST_CASE("threaded smoothing matches single-threaded output") {
    auto snaps = noisy_line(10, 4, 20, 0.05, 21);
    SmoothOptions opts1;
    opts1.threads = 1;
    SmoothOptions opts4 = opts1;
    opts4.threads = 4;
    auto a = smooth_embeddings(snaps, opts1);
    auto b = smooth_embeddings(snaps, opts4);
    for (std::size_t t = 0; t < snaps.size(); ++t)
        CHECK(a.snapshots[t].vectors == b.snapshots[t].vectors);
}
