#include "embshift/shift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "embshift/errors.hpp"

namespace embshift {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

bool ShiftSeries::defined(std::size_t t) const {
    return t < values.size() && !std::isnan(values[t]);
}

double delta_magnitude(std::span<const double> v_t,
                       std::span<const double> v_prev) {
    if (v_t.size() != v_prev.size())
        throw DataError("delta_magnitude: dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < v_t.size(); ++i) {
        double d = v_t[i] - v_prev[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double delta_cosine(std::span<const double> v_t, std::span<const double> v_prev) {
    if (v_t.size() != v_prev.size())
        throw DataError("delta_cosine: dimension mismatch");
    if (std::equal(v_t.begin(), v_t.end(), v_prev.begin())) return 0.0;
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < v_t.size(); ++i) {
        dot += v_t[i] * v_prev[i];
        na += v_t[i] * v_t[i];
        nb += v_prev[i] * v_prev[i];
    }
    if (na == 0 || nb == 0)
        throw DataError("delta_cosine: zero vector (degenerate embedding)");
    return std::clamp(1.0 - dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 2.0);
}

namespace {

double cosine_similarity(const std::vector<double> &a, const std::vector<double> &b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    double denom = std::sqrt(na) * std::sqrt(nb);
    return denom == 0 ? 0.0 : dot / denom;
}

}  // namespace

NeighborhoodSnapshot topk_neighbors(const EmbeddingSnapshot &snapshot,
                                    const std::string &node_id, int k) {
    auto it = snapshot.vectors.find(node_id);
    if (it == snapshot.vectors.end())
        throw DataError("topk_neighbors: unknown node '" + node_id + "'");
    if (k < 1) throw DataError("topk_neighbors: k must be >= 1");

    NeighborhoodSnapshot out;
    out.node_id = node_id;
    out.timestamp_index = snapshot.timestamp_index;
    out.k = k;
    out.neighbors.reserve(snapshot.vectors.size());
    for (const auto &[other, v] : snapshot.vectors) {
        if (other == node_id) continue;
        out.neighbors.emplace_back(other, cosine_similarity(it->second, v));
    }
    // Map iteration is id-sorted, so stable sort realizes the id tie-break.
    std::stable_sort(out.neighbors.begin(), out.neighbors.end(),
                     [](const auto &a, const auto &b) { return a.second > b.second; });
    if (out.neighbors.size() > static_cast<std::size_t>(k))
        out.neighbors.resize(static_cast<std::size_t>(k));
    return out;
}

std::map<std::string, ShiftSeries> shift_series(
    std::span<const EmbeddingSnapshot> snapshots, ShiftMetric metric,
    int delta_t) {
    if (snapshots.size() < 2) throw DataError("shift_series: need >= 2 snapshots");
    if (delta_t < 1) throw DataError("shift_series: delta_t must be >= 1");
    const std::size_t T = snapshots.size();

    std::map<std::string, ShiftSeries> out;
    for (const auto &[node, _] : snapshots.back().vectors) {
        ShiftSeries s;
        s.node_id = node;
        s.metric = metric;
        s.delta_t = delta_t;
        s.values.assign(T, kNaN);
        out.emplace(node, std::move(s));
    }
    for (std::size_t t = static_cast<std::size_t>(delta_t); t < T; ++t) {
        const auto &cur = snapshots[t];
        const auto &prev = snapshots[t - delta_t];
        for (const auto &[node, vp] : prev.vectors) {
            auto it = cur.vectors.find(node);
            if (it == cur.vectors.end()) continue;
            double v = metric == ShiftMetric::magnitude
                           ? delta_magnitude(it->second, vp)
                           : delta_cosine(it->second, vp);
            out.at(node).values[t] = v;
        }
    }
    return out;
}

std::map<std::string, int> max_shift_month(
    const std::map<std::string, ShiftSeries> &magnitude_series,
    std::size_t *omitted) {
    std::size_t T = 0;
    for (const auto &[_, s] : magnitude_series)
        T = std::max(T, s.values.size());

    std::vector<double> column_total(T, 0.0);
    for (const auto &[_, s] : magnitude_series)
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (s.defined(t)) column_total[t] += s.values[t];

    std::map<std::string, int> out;
    std::size_t skipped = 0;
    for (const auto &[node, s] : magnitude_series) {
        double best = 0;
        int best_t = -1;
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (!s.defined(t) || column_total[t] <= 0) continue;
            double normalized = s.values[t] / column_total[t];
            if (normalized > best) {
                best = normalized;
                best_t = static_cast<int>(t);
            }
        }
        if (best_t < 0)
            ++skipped;  // all-zero or all-undefined series
        else
            out[node] = best_t;
    }
    if (omitted) *omitted = skipped;
    return out;
}

namespace {

// Ranked neighbor ids for every node, at the largest k needed.
std::map<std::string, std::vector<std::string>> all_topk(
    const EmbeddingSnapshot &snapshot, int k) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto &[node, _] : snapshot.vectors) {
        auto nb = topk_neighbors(snapshot, node, k);
        std::vector<std::string> ids;
        ids.reserve(nb.neighbors.size());
        for (auto &[id, sim] : nb.neighbors) ids.push_back(std::move(id));
        out.emplace(node, std::move(ids));
    }
    return out;
}

double overlap_of(const std::vector<std::string> &now,
                  const std::vector<std::string> &then, std::size_t k) {
    std::size_t k_now = std::min(k, now.size());
    std::size_t k_then = std::min(k, then.size());
    if (k_then == 0) return kNaN;
    std::set<std::string> then_set(then.begin(), then.begin() + k_then);
    std::size_t inter = 0;
    for (std::size_t i = 0; i < k_now; ++i) inter += then_set.count(now[i]);
    return static_cast<double>(inter) / static_cast<double>(k_then);
}

}  // namespace

std::vector<OverlapRow> overlap_curves(std::span<const EmbeddingSnapshot> snapshots,
                                       std::span<const int> k_list,
                                       std::span<const int> dt_list) {
    if (k_list.empty() || dt_list.empty())
        throw ConfigError("overlap_curves: empty k or delta_t list");
    const int k_max = *std::max_element(k_list.begin(), k_list.end());
    const std::size_t T = snapshots.size();

    std::vector<std::map<std::string, std::vector<std::string>>> lists(T);
    for (std::size_t t = 0; t < T; ++t) lists[t] = all_topk(snapshots[t], k_max);

    std::vector<OverlapRow> rows;
    for (int dt : dt_list) {
        if (dt < 1) throw ConfigError("overlap_curves: delta_t must be >= 1");
        for (std::size_t t = static_cast<std::size_t>(dt); t < T; ++t) {
            for (int k : k_list) {
                double sum = 0;
                std::size_t n = 0;
                for (const auto &[node, then] : lists[t - dt]) {
                    auto it = lists[t].find(node);
                    if (it == lists[t].end()) continue;
                    double o = overlap_of(it->second, then,
                                          static_cast<std::size_t>(k));
                    if (std::isnan(o)) continue;
                    sum += o;
                    ++n;
                }
                rows.push_back({static_cast<int>(t), k, dt,
                                n == 0 ? kNaN : sum / static_cast<double>(n)});
            }
        }
    }
    return rows;
}

std::vector<double> neighborhood_overlap(
    std::span<const EmbeddingSnapshot> snapshots, int k, int delta_t) {
    std::vector<int> ks{k}, dts{delta_t};
    auto rows = overlap_curves(snapshots, ks, dts);
    std::vector<double> out(snapshots.size(), kNaN);
    for (const auto &r : rows) out[static_cast<std::size_t>(r.t)] = r.overlap;
    return out;
}

CategoryMix top_shifting_category_mix(
    const std::map<std::string, ShiftSeries> &cosine_series, std::size_t t,
    std::size_t n_top, const std::map<std::string, std::string> &categories,
    const std::set<std::string> &eligible) {
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto &[node, s] : cosine_series) {
        if (!s.defined(t)) continue;
        if (!eligible.empty() && !eligible.count(node)) continue;
        ranked.emplace_back(node, s.values[t]);
    }
    if (ranked.empty())
        throw DataError("top_shifting_category_mix: no eligible nodes at t=" +
                        std::to_string(t));
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto &a, const auto &b) { return a.second > b.second; });

    auto category_of = [&](const std::string &node) -> std::string {
        auto it = categories.find(node);
        return it == categories.end() ? std::string("unknown") : it->second;
    };

    CategoryMix mix;
    for (const auto &[node, _] : ranked)
        mix.base_fraction[category_of(node)] += 1.0;
    std::size_t top_n = std::min(n_top, ranked.size());
    for (std::size_t i = 0; i < top_n; ++i)
        mix.top_fraction[category_of(ranked[i].first)] += 1.0;

    for (auto &[_, v] : mix.base_fraction) v /= static_cast<double>(ranked.size());
    for (auto &[_, v] : mix.top_fraction) v /= static_cast<double>(top_n);
    return mix;
}

}  // namespace embshift
