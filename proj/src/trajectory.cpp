#include "embshift/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "embshift/errors.hpp"
#include "embshift/kalman.hpp"
#include "embshift/shift.hpp"

namespace embshift {

namespace {

// Corpus-mean magnitude shift per step; 1.0 where undefined or ~zero so the
// normalization is a no-op there.
std::vector<double> step_normalizers(std::span<const EmbeddingSnapshot> snapshots) {
    const std::size_t T = snapshots.size();
    std::vector<double> out(T, 1.0);
    for (std::size_t t = 1; t < T; ++t) {
        double sum = 0;
        std::size_t n = 0;
        for (const auto &[node, vp] : snapshots[t - 1].vectors) {
            auto it = snapshots[t].vectors.find(node);
            if (it == snapshots[t].vectors.end()) continue;
            sum += delta_magnitude(it->second, vp);
            ++n;
        }
        if (n > 0 && sum / static_cast<double>(n) > 1e-12)
            out[t] = sum / static_cast<double>(n);
    }
    return out;
}

// EM-fit a constant-velocity model to one scalar series and return the
// smoothed positions. Exactly constant series are returned as-is.
std::vector<double> smooth_scalar_series(const std::vector<double> &series,
                                         const SmoothOptions &options) {
    const std::size_t L = series.size();
    auto [lo, hi] = std::minmax_element(series.begin(), series.end());
    if (*hi - *lo == 0.0) return series;

    double mean_diff = 0, var_diff = 0;
    for (std::size_t i = 1; i < L; ++i) mean_diff += series[i] - series[i - 1];
    mean_diff /= static_cast<double>(L - 1);
    for (std::size_t i = 1; i < L; ++i) {
        double d = series[i] - series[i - 1] - mean_diff;
        var_diff += d * d;
    }
    var_diff /= static_cast<double>(L - 1);

    double q0 = std::max(var_diff / 2, 1e-8);
    double r0 = std::max(var_diff / 2, 1e-8);
    KalmanModel model = KalmanModel::constant_velocity(
        q0, r0, series[0], mean_diff, std::max(var_diff, 1e-6));

    std::vector<Eigen::VectorXd> obs(L);
    for (std::size_t i = 0; i < L; ++i) {
        obs[i].resize(1);
        obs[i][0] = series[i];
    }
    model = fit_em(obs, model, options.em_max_iters, options.em_tol);
    SmoothResult s = kalman_smooth(obs, model);
    std::vector<double> out(L);
    for (std::size_t i = 0; i < L; ++i) out[i] = s.means[i][0];
    return out;
}

}  // namespace

SmoothOutcome smooth_embeddings(std::span<const EmbeddingSnapshot> snapshots,
                                const SmoothOptions &options) {
    if (snapshots.size() < 4)
        throw DataError("smooth_embeddings: need >= 4 snapshots");
    const std::size_t T = snapshots.size();
    const int d = snapshots[0].dim;

    SmoothOutcome outcome;
    outcome.snapshots.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        outcome.snapshots[t].timestamp_index = snapshots[t].timestamp_index;
        outcome.snapshots[t].dim = d;
        outcome.snapshots[t].smoothed = true;
        outcome.snapshots[t].updated_this_round = snapshots[t].updated_this_round;
    }

    std::vector<double> normalizer =
        options.normalize ? step_normalizers(snapshots)
                          : std::vector<double>(T, 1.0);

    // Nodes appear cumulatively; birth is the first snapshot holding them.
    std::vector<std::string> node_list;
    std::vector<std::size_t> birth;
    for (const auto &[node, _] : snapshots.back().vectors) {
        std::size_t b = 0;
        while (b < T && !snapshots[b].has(node)) ++b;
        node_list.push_back(node);
        birth.push_back(b);
    }

    // smoothed trajectory per node, one vector per owned timestamp
    std::vector<std::vector<std::vector<double>>> results(node_list.size());
    std::vector<bool> passthrough(node_list.size(), false);

    auto process = [&](std::size_t begin, std::size_t end) {
        for (std::size_t ni = begin; ni < end; ++ni) {
            const std::string &node = node_list[ni];
            const std::size_t b = birth[ni];
            const std::size_t L = T - b;
            auto &traj = results[ni];
            traj.resize(L);
            if (L < static_cast<std::size_t>(options.min_observations)) {
                for (std::size_t i = 0; i < L; ++i)
                    traj[i] = snapshots[b + i].vec(node);
                passthrough[ni] = true;
                continue;
            }
            for (std::size_t i = 0; i < L; ++i) traj[i].resize(d);
            std::vector<double> series(L), smoothed(L);
            for (int j = 0; j < d; ++j) {
                series[0] = snapshots[b].vec(node)[j];
                for (std::size_t i = 1; i < L; ++i)
                    series[i] = series[i - 1] +
                                (snapshots[b + i].vec(node)[j] -
                                 snapshots[b + i - 1].vec(node)[j]) /
                                    normalizer[b + i];
                smoothed = smooth_scalar_series(series, options);
                traj[0][j] = smoothed[0];
                for (std::size_t i = 1; i < L; ++i)
                    traj[i][j] = traj[i - 1][j] +
                                 (smoothed[i] - smoothed[i - 1]) * normalizer[b + i];
            }
        }
    };

    if (options.threads <= 1) {
        process(0, node_list.size());
    } else {
        std::vector<std::thread> workers;
        std::size_t chunk =
            (node_list.size() + options.threads - 1) / options.threads;
        for (int t = 0; t < options.threads; ++t) {
            std::size_t begin = chunk * static_cast<std::size_t>(t);
            std::size_t end = std::min(node_list.size(), begin + chunk);
            if (begin >= end) break;
            workers.emplace_back(process, begin, end);
        }
        for (auto &w : workers) w.join();
    }

    for (std::size_t ni = 0; ni < node_list.size(); ++ni) {
        for (std::size_t i = 0; i < results[ni].size(); ++i)
            outcome.snapshots[birth[ni] + i].vectors[node_list[ni]] =
                std::move(results[ni][i]);
        if (passthrough[ni]) outcome.passthrough_nodes.insert(node_list[ni]);
    }
    return outcome;
}

std::vector<VelocityVector> velocity(std::span<const EmbeddingSnapshot> snapshots) {
    if (snapshots.size() < 2) throw DataError("velocity: need >= 2 snapshots");
    std::vector<VelocityVector> out;
    for (std::size_t t = 1; t < snapshots.size(); ++t) {
        for (const auto &[node, vp] : snapshots[t - 1].vectors) {
            auto it = snapshots[t].vectors.find(node);
            if (it == snapshots[t].vectors.end()) continue;
            VelocityVector v;
            v.node_id = node;
            v.timestamp_index = static_cast<int>(t);
            v.components.resize(vp.size());
            for (std::size_t j = 0; j < vp.size(); ++j)
                v.components[j] = it->second[j] - vp[j];
            out.push_back(std::move(v));
        }
    }
    return out;
}

}  // namespace embshift
