#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "embshift/transactions.hpp"

namespace embshift {

// A persistent regime change: from `month` on, propensity mass of the shocked
// categories is scaled by `intensity` and the removed mass is redistributed
// proportionally over `redistribute_to`.
struct Shock {
    int month = 0;
    std::set<int> categories;
    double intensity = 1.0;
    std::set<int> redistribute_to;
};

struct Segment {
    std::string name;
    double fraction = 1.0;            // share of accounts
    std::vector<double> propensities; // per-category, sums to 1
    double mean_transactions = 20.0;  // Poisson mean per account per month
};

struct WorldSpec {
    int n_accounts = 2000;
    int n_merchants = 1000;
    int n_categories = 8;
    int months = 24;
    int start_year = 2018;
    int start_month = 1;
    std::vector<Segment> segments;
    std::vector<std::vector<double>> seasonality;  // category -> 12 factors
    double birth_rate = 0.0;   // per-month fraction of initial counts added
    double death_rate = 0.0;   // per-month deactivation probability
    std::vector<Shock> shocks;
    double zipf_exponent = 1.1;
    std::uint64_t rng_seed = 42;

    void validate() const;

    // Two balanced segments with mildly different propensities and a gentle
    // sinusoidal seasonality; no churn, no shocks.
    static WorldSpec demo(int n_accounts, int n_merchants, int n_categories,
                          int months);

    static std::string category_name(int c);
    static std::string merchant_name(int m);
    static std::string account_name(int a);
    // Merchants cycle through categories, so category sizes stay balanced.
    static int category_of_merchant(int merchant_index, int n_categories);

    // Effective per-category distribution for a segment at a month, with
    // seasonality and active shocks applied (normalized).
    std::vector<double> category_distribution(const Segment &segment,
                                              int month) const;

    void save(const std::filesystem::path &path) const;
    static WorldSpec load(const std::filesystem::path &path);

    // Same schema as save/load, for embedding in larger config files.
    std::string to_json_string() const;
    static WorldSpec from_json_string(const std::string &text);
};

// Deterministic function of the spec: fixed rng_seed gives a bit-identical
// record stream. Per-month sampling uses seed-split streams.
std::vector<TransactionRecord> generate(const WorldSpec &spec);

struct GroundTruth {
    // month -> category -> expected transaction share
    std::vector<std::vector<double>> category_shares;
    // shock month -> merchant ids whose regime changed there
    std::map<int, std::set<std::string>> shocked_merchants;
};

GroundTruth ground_truth(const WorldSpec &spec);

}  // namespace embshift
