#include "embshift/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "embshift/errors.hpp"
#include "embshift/rng.hpp"
#include "embshift/time_utils.hpp"

namespace embshift {

using nlohmann::json;

void WorldSpec::validate() const {
    if (n_accounts < 1 || n_merchants < 1 || n_categories < 1 || months < 1)
        throw ConfigError("WorldSpec: counts and months must be positive");
    if (segments.empty()) throw ConfigError("WorldSpec: no account segments");
    double frac = 0;
    for (const auto &s : segments) {
        frac += s.fraction;
        if (static_cast<int>(s.propensities.size()) != n_categories)
            throw ConfigError("segment '" + s.name + "' propensity row has " +
                              std::to_string(s.propensities.size()) +
                              " entries, expected " + std::to_string(n_categories));
        double row = 0;
        for (double p : s.propensities) {
            if (p < 0) throw ConfigError("negative propensity in segment '" + s.name + "'");
            row += p;
        }
        if (std::abs(row - 1.0) > 1e-9)
            throw ConfigError("propensity row of segment '" + s.name +
                              "' sums to " + std::to_string(row) + ", expected 1");
        if (s.mean_transactions <= 0)
            throw ConfigError("segment '" + s.name + "' mean_transactions must be > 0");
    }
    if (std::abs(frac - 1.0) > 1e-9)
        throw ConfigError("segment fractions sum to " + std::to_string(frac));
    if (!seasonality.empty()) {
        if (static_cast<int>(seasonality.size()) != n_categories)
            throw ConfigError("seasonality must have one row per category");
        for (const auto &row : seasonality)
            if (row.size() != 12)
                throw ConfigError("seasonality rows must have 12 monthly factors");
    }
    for (const auto &shock : shocks) {
        if (shock.month < 0 || shock.month >= months)
            throw ConfigError("shock month " + std::to_string(shock.month) +
                              " outside [0, " + std::to_string(months) + ")");
        if (shock.intensity < 0) throw ConfigError("shock intensity must be >= 0");
        for (int c : shock.categories)
            if (c < 0 || c >= n_categories)
                throw ConfigError("shock references invalid category " + std::to_string(c));
        for (int c : shock.redistribute_to)
            if (c < 0 || c >= n_categories || shock.categories.count(c))
                throw ConfigError("shock redistribution target " + std::to_string(c) +
                                  " invalid");
    }
    if (birth_rate < 0 || death_rate < 0 || death_rate >= 1)
        throw ConfigError("churn rates out of range");
    if (zipf_exponent <= 0) throw ConfigError("zipf_exponent must be > 0");
}

std::string WorldSpec::category_name(int c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "cat%02d", c);
    return buf;
}

std::string WorldSpec::merchant_name(int m) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "m%06d", m);
    return buf;
}

std::string WorldSpec::account_name(int a) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "a%06d", a);
    return buf;
}

int WorldSpec::category_of_merchant(int merchant_index, int n_categories) {
    return merchant_index % n_categories;
}

WorldSpec WorldSpec::demo(int n_accounts, int n_merchants, int n_categories,
                          int months) {
    WorldSpec spec;
    spec.n_accounts = n_accounts;
    spec.n_merchants = n_merchants;
    spec.n_categories = n_categories;
    spec.months = months;

    Segment a{"mainstream", 0.6, {}, 20.0};
    Segment b{"upscale", 0.4, {}, 20.0};
    a.propensities.resize(n_categories);
    b.propensities.resize(n_categories);
    for (int c = 0; c < n_categories; ++c) {
        a.propensities[c] = 1.0 + 0.5 * std::cos(2.0 * c);
        b.propensities[c] = 1.0 + 0.5 * std::sin(1.0 + c);
    }
    auto normalize = [](std::vector<double> &row) {
        double s = 0;
        for (double x : row) s += x;
        for (double &x : row) x /= s;
    };
    normalize(a.propensities);
    normalize(b.propensities);
    spec.segments = {a, b};

    spec.seasonality.assign(n_categories, std::vector<double>(12, 1.0));
    for (int c = 0; c < n_categories; ++c)
        for (int m = 0; m < 12; ++m)
            spec.seasonality[c][m] =
                1.0 + 0.25 * std::sin(2.0 * std::numbers::pi * (m + 2 * c) / 12.0);
    return spec;
}

std::vector<double> WorldSpec::category_distribution(const Segment &segment,
                                                     int month) const {
    std::vector<double> p = segment.propensities;
    if (!seasonality.empty()) {
        int moy = (start_month - 1 + month) % 12;
        for (int c = 0; c < n_categories; ++c) p[c] *= seasonality[c][moy];
    }
    for (const auto &shock : shocks) {
        if (month < shock.month) continue;
        double removed = 0;
        for (int c : shock.categories) {
            removed += p[c] * (1.0 - shock.intensity);
            p[c] *= shock.intensity;
        }
        double target_mass = 0;
        for (int c : shock.redistribute_to) target_mass += p[c];
        if (target_mass > 0)
            for (int c : shock.redistribute_to) p[c] += removed * p[c] / target_mass;
    }
    // a boosting shock (intensity > 1) can overdraw the donor categories
    for (double &x : p) x = std::max(x, 0.0);
    double s = 0;
    for (double x : p) s += x;
    for (double &x : p) x /= s;
    return p;
}

namespace {

int sample_poisson(Rng &rng, double mean) {
    // Knuth; fine for desk-scale means
    double limit = std::exp(-mean);
    double prod = rng.uniform();
    int n = 0;
    while (prod > limit) {
        prod *= rng.uniform();
        ++n;
    }
    return n;
}

std::size_t sample_cdf(Rng &rng, const std::vector<double> &cdf) {
    double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    return static_cast<std::size_t>(it - cdf.begin());
}

struct World {
    // index -> alive flag; ids never reused
    std::vector<bool> account_alive;
    std::vector<bool> merchant_alive;
    std::vector<int> account_segment;
    std::vector<int> merchant_category;
};

}  // namespace

std::vector<TransactionRecord> generate(const WorldSpec &spec) {
    spec.validate();

    World world;
    Rng setup_rng(mix_seed(spec.rng_seed, 0x5345'5455ULL));
    std::vector<double> segment_cdf;
    {
        double acc = 0;
        for (const auto &s : spec.segments) {
            acc += s.fraction;
            segment_cdf.push_back(acc);
        }
    }
    auto add_account = [&] {
        world.account_alive.push_back(true);
        world.account_segment.push_back(
            static_cast<int>(sample_cdf(setup_rng, segment_cdf)));
    };
    auto add_merchant = [&] {
        int idx = static_cast<int>(world.merchant_alive.size());
        world.merchant_alive.push_back(true);
        world.merchant_category.push_back(
            WorldSpec::category_of_merchant(idx, spec.n_categories));
    };
    for (int i = 0; i < spec.n_accounts; ++i) add_account();
    for (int i = 0; i < spec.n_merchants; ++i) add_merchant();

    std::vector<TransactionRecord> records;
    const int births_acc =
        static_cast<int>(std::lround(spec.birth_rate * spec.n_accounts));
    const int births_mer =
        static_cast<int>(std::lround(spec.birth_rate * spec.n_merchants));

    for (int month = 0; month < spec.months; ++month) {
        if (month > 0 && (spec.birth_rate > 0 || spec.death_rate > 0)) {
            Rng churn_rng(mix_seed(spec.rng_seed, 0x4348'5255ULL + month));
            if (spec.death_rate > 0) {
                for (std::size_t i = 0; i < world.account_alive.size(); ++i)
                    if (world.account_alive[i] && churn_rng.uniform() < spec.death_rate)
                        world.account_alive[i] = false;
                for (std::size_t i = 0; i < world.merchant_alive.size(); ++i)
                    if (world.merchant_alive[i] && churn_rng.uniform() < spec.death_rate)
                        world.merchant_alive[i] = false;
            }
            for (int i = 0; i < births_acc; ++i) add_account();
            for (int i = 0; i < births_mer; ++i) add_merchant();
        }

        // zipf popularity over the month's active merchants, per category
        std::vector<std::vector<int>> members(spec.n_categories);
        std::vector<std::vector<double>> merchant_cdf(spec.n_categories);
        for (std::size_t i = 0; i < world.merchant_alive.size(); ++i)
            if (world.merchant_alive[i])
                members[world.merchant_category[i]].push_back(static_cast<int>(i));
        for (int c = 0; c < spec.n_categories; ++c) {
            double acc = 0;
            for (std::size_t rank = 0; rank < members[c].size(); ++rank) {
                acc += std::pow(static_cast<double>(rank + 1), -spec.zipf_exponent);
                merchant_cdf[c].push_back(acc);
            }
        }

        std::vector<std::vector<double>> category_cdf(spec.segments.size());
        for (std::size_t s = 0; s < spec.segments.size(); ++s) {
            auto p = spec.category_distribution(spec.segments[s], month);
            double acc = 0;
            for (double x : p) {
                acc += x;
                category_cdf[s].push_back(acc);
            }
        }

        int y = spec.start_year + (spec.start_month - 1 + month) / 12;
        int m = (spec.start_month - 1 + month) % 12 + 1;
        std::int64_t t0 = month_start_epoch(y, m);
        std::int64_t t1 = month_start_epoch(m == 12 ? y + 1 : y, m == 12 ? 1 : m + 1);

        Rng rng(mix_seed(spec.rng_seed, 0x4d4f'4e00ULL + month));
        for (std::size_t a = 0; a < world.account_alive.size(); ++a) {
            if (!world.account_alive[a]) continue;
            const Segment &segment = spec.segments[world.account_segment[a]];
            int n_txn = sample_poisson(rng, segment.mean_transactions);
            for (int t = 0; t < n_txn; ++t) {
                int c = static_cast<int>(
                    sample_cdf(rng, category_cdf[world.account_segment[a]]));
                if (members[c].empty()) continue;
                int merchant = members[c][sample_cdf(rng, merchant_cdf[c])];
                TransactionRecord rec;
                rec.account_id = WorldSpec::account_name(static_cast<int>(a));
                rec.merchant_id = WorldSpec::merchant_name(merchant);
                rec.timestamp =
                    t0 + static_cast<std::int64_t>(rng.uniform() *
                                                   static_cast<double>(t1 - t0));
                rec.category = WorldSpec::category_name(c);
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

GroundTruth ground_truth(const WorldSpec &spec) {
    spec.validate();
    GroundTruth gt;
    gt.category_shares.resize(spec.months);

    double weight_total = 0;
    for (const auto &s : spec.segments) weight_total += s.fraction * s.mean_transactions;
    for (int month = 0; month < spec.months; ++month) {
        std::vector<double> share(spec.n_categories, 0.0);
        for (const auto &s : spec.segments) {
            auto p = spec.category_distribution(s, month);
            for (int c = 0; c < spec.n_categories; ++c)
                share[c] += s.fraction * s.mean_transactions * p[c] / weight_total;
        }
        gt.category_shares[month] = std::move(share);
    }

    // Merchant ids and categories are deterministic: births_per_month is a
    // fixed count and ids are sequential, only death victims are random.
    const int births_mer =
        static_cast<int>(std::lround(spec.birth_rate * spec.n_merchants));
    for (const auto &shock : spec.shocks) {
        std::set<std::string> &nodes = gt.shocked_merchants[shock.month];
        int merchants_by_then = spec.n_merchants + births_mer * shock.month;
        for (int i = 0; i < merchants_by_then; ++i)
            if (shock.categories.count(
                    WorldSpec::category_of_merchant(i, spec.n_categories)))
                nodes.insert(WorldSpec::merchant_name(i));
    }
    return gt;
}

std::string WorldSpec::to_json_string() const {
    json j;
    j["n_accounts"] = n_accounts;
    j["n_merchants"] = n_merchants;
    j["n_categories"] = n_categories;
    j["months"] = months;
    j["start_year"] = start_year;
    j["start_month"] = start_month;
    j["birth_rate"] = birth_rate;
    j["death_rate"] = death_rate;
    j["zipf_exponent"] = zipf_exponent;
    j["rng_seed"] = rng_seed;
    j["seasonality"] = seasonality;
    j["segments"] = json::array();
    for (const auto &s : segments)
        j["segments"].push_back({{"name", s.name},
                                 {"fraction", s.fraction},
                                 {"propensities", s.propensities},
                                 {"mean_transactions", s.mean_transactions}});
    j["shocks"] = json::array();
    for (const auto &s : shocks)
        j["shocks"].push_back({{"month", s.month},
                               {"categories", s.categories},
                               {"intensity", s.intensity},
                               {"redistribute_to", s.redistribute_to}});
    return j.dump(2) + '\n';
}

void WorldSpec::save(const std::filesystem::path &path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << to_json_string();
}

WorldSpec WorldSpec::from_json_string(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("world spec: ") + e.what());
    }
    WorldSpec spec;
    try {
        spec.n_accounts = j.at("n_accounts");
        spec.n_merchants = j.at("n_merchants");
        spec.n_categories = j.at("n_categories");
        spec.months = j.at("months");
        spec.start_year = j.value("start_year", 2018);
        spec.start_month = j.value("start_month", 1);
        spec.birth_rate = j.value("birth_rate", 0.0);
        spec.death_rate = j.value("death_rate", 0.0);
        spec.zipf_exponent = j.value("zipf_exponent", 1.1);
        spec.rng_seed = j.value("rng_seed", 42ULL);
        spec.seasonality =
            j.value("seasonality", std::vector<std::vector<double>>{});
        if (!j.contains("segments") || spec.seasonality.empty()) {
            // partial specs inherit the demo population structure
            WorldSpec base = demo(spec.n_accounts, spec.n_merchants,
                                  spec.n_categories, spec.months);
            if (!j.contains("segments")) spec.segments = base.segments;
            if (spec.seasonality.empty()) spec.seasonality = base.seasonality;
        }
        for (const auto &s : j.value("segments", json::array())) {
            Segment seg;
            seg.name = s.at("name");
            seg.fraction = s.at("fraction");
            seg.propensities = s.at("propensities").get<std::vector<double>>();
            seg.mean_transactions = s.value("mean_transactions", 20.0);
            spec.segments.push_back(std::move(seg));
        }
        for (const auto &s : j.value("shocks", json::array())) {
            Shock shock;
            shock.month = s.at("month");
            shock.categories = s.at("categories").get<std::set<int>>();
            shock.intensity = s.at("intensity");
            shock.redistribute_to =
                s.value("redistribute_to", std::set<int>{});
            spec.shocks.push_back(std::move(shock));
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("world spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

WorldSpec WorldSpec::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

}  // namespace embshift
