#include "embshift/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embshift/errors.hpp"
#include "embshift/manifest.hpp"
#include "embshift/rng.hpp"
#include "embshift/shift.hpp"
#include "embshift/time_utils.hpp"

namespace embshift {

using nlohmann::json;

namespace {

constexpr const char *kVersion = "embshift 0.1.0";

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string snapshot_file(int index) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "snapshot_%03d.emb", index);
    return buf;
}

std::string pair_file(int index) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "window_%03d.pairs", index);
    return buf;
}

std::vector<std::filesystem::path> sorted_dir(const std::filesystem::path &dir,
                                              const std::string &extension) {
    std::vector<std::filesystem::path> out;
    if (!std::filesystem::is_directory(dir)) return out;
    for (const auto &entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == extension) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

json train_to_json(const TrainConfig &c) {
    return {{"dim", c.dim},
            {"negatives_per_positive", c.negatives_per_positive},
            {"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"min_learning_rate", c.min_learning_rate},
            {"negative_exponent", c.negative_exponent},
            {"pair_count_cap", c.pair_count_cap}};
}

void train_from_json(const json &j, TrainConfig &c) {
    c.dim = j.value("dim", c.dim);
    c.negatives_per_positive =
        j.value("negatives_per_positive", c.negatives_per_positive);
    c.epochs = j.value("epochs", c.epochs);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_learning_rate = j.value("min_learning_rate", c.min_learning_rate);
    c.negative_exponent = j.value("negative_exponent", c.negative_exponent);
    c.pair_count_cap = j.value("pair_count_cap", c.pair_count_cap);
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }

    PipelineConfig c;
    try {
        c.out_dir = j.value("out_dir", std::string("out"));
        c.input_path = j.value("input_path", std::string(""));
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        if (j.contains("world"))
            c.world = WorldSpec::from_json_string(j["world"].dump());
        if (j.contains("ingest")) {
            const json &g = j["ingest"];
            std::string d = g.value("delimiter", std::string(","));
            if (d.size() != 1) throw ConfigError("ingest.delimiter must be one character");
            c.ingest_format.delimiter = d[0];
            c.ingest_format.has_header = g.value("has_header", false);
            if (g.contains("columns")) {
                const json &cols = g["columns"];
                c.ingest_format.columns.account = cols.value("account", 0);
                c.ingest_format.columns.merchant = cols.value("merchant", 1);
                c.ingest_format.columns.timestamp = cols.value("timestamp", 2);
                c.ingest_format.columns.category = cols.value("category", 3);
            }
        }
        if (j.contains("window")) {
            if (j["window"].is_string() && j["window"] == "monthly") {
                c.window.kind = WindowSpec::Kind::monthly;
            } else if (j["window"].is_object()) {
                c.window.kind = WindowSpec::Kind::fixed_duration;
                c.window.duration_seconds = j["window"].at("fixed_seconds");
            } else {
                throw ConfigError("window must be \"monthly\" or {\"fixed_seconds\": n}");
            }
        }
        c.node_type = node_type_from_string(j.value("node_type", std::string("merchant")));
        if (j.contains("train")) train_from_json(j["train"], c.train);
        if (j.contains("analytics")) {
            const json &a = j["analytics"];
            c.analytics.k_list = a.value("k_list", c.analytics.k_list);
            c.analytics.dt_list = a.value("dt_list", c.analytics.dt_list);
            c.analytics.n_top_fraction =
                a.value("n_top_fraction", c.analytics.n_top_fraction);
            c.analytics.trim_min_pair_count =
                a.value("trim_min_pair_count", c.analytics.trim_min_pair_count);
        }
        if (j.contains("smooth")) {
            const json &s = j["smooth"];
            c.smooth.normalize = s.value("normalize", c.smooth.normalize);
            c.smooth.em_max_iters = s.value("em_max_iters", c.smooth.em_max_iters);
            c.smooth.em_tol = s.value("em_tol", c.smooth.em_tol);
            c.smooth.min_observations =
                s.value("min_observations", c.smooth.min_observations);
        }
        if (j.contains("forecast")) {
            const json &f = j["forecast"];
            c.forecast.hidden_units = f.value("hidden_units", c.forecast.hidden_units);
            c.forecast.learning_rate =
                f.value("learning_rate", c.forecast.learning_rate);
            c.forecast.epochs = f.value("epochs", c.forecast.epochs);
            c.forecast.batch_size = f.value("batch_size", c.forecast.batch_size);
            c.forecast.horizon = f.value("horizon", c.forecast.horizon);
            c.forecast.test_t = f.value("test_t", c.forecast.test_t);
            c.forecast_sequence_lengths =
                f.value("sequence_lengths", c.forecast_sequence_lengths);
            c.forecast_training_lengths =
                f.value("training_lengths", c.forecast_training_lengths);
        }
    } catch (const json::exception &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return c;
}

void PipelineConfig::finalize() {
    world.rng_seed = mix_seed(seed, 1);
    train.rng_seed = mix_seed(seed, 2);
    forecast.rng_seed = mix_seed(seed, 3);
    train.threads = threads;
    smooth.threads = threads;
}

std::string PipelineConfig::hash() const {
    json j;
    j["seed"] = seed;
    j["threads"] = threads == 1 ? 1 : 0;  // deterministic vs parallel mode
    j["world"] = json::parse(world.to_json_string());
    j["train"] = train_to_json(train);
    j["node_type"] = to_string(node_type);
    j["window"] = window.kind == WindowSpec::Kind::monthly
                      ? json("monthly")
                      : json{{"fixed_seconds", window.duration_seconds}};
    j["analytics"] = {{"k_list", analytics.k_list},
                      {"dt_list", analytics.dt_list},
                      {"n_top_fraction", analytics.n_top_fraction},
                      {"trim_min_pair_count", analytics.trim_min_pair_count}};
    j["smooth"] = {{"normalize", smooth.normalize},
                   {"em_max_iters", smooth.em_max_iters},
                   {"em_tol", smooth.em_tol},
                   {"min_observations", smooth.min_observations}};
    j["forecast"] = {{"hidden_units", forecast.hidden_units},
                     {"learning_rate", forecast.learning_rate},
                     {"epochs", forecast.epochs},
                     {"batch_size", forecast.batch_size},
                     {"horizon", forecast.horizon},
                     {"test_t", forecast.test_t},
                     {"sequence_lengths", forecast_sequence_lengths},
                     {"training_lengths", forecast_training_lengths}};
    return hash_hex(fnv1a_hash(j.dump()));
}

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
    config_.finalize();
    std::filesystem::create_directories(config_.out_dir);
    std::filesystem::create_directories(out("manifests"));
}

const std::vector<std::string> &Pipeline::stage_names() {
    static const std::vector<std::string> names = {
        "gen",        "ingest", "project",  "train",    "shift",
        "neighborhoods", "smooth", "velocity", "forecast", "report"};
    return names;
}

std::filesystem::path Pipeline::out(const std::string &relative) const {
    return config_.out_dir / relative;
}

void Pipeline::require(const std::string &relative,
                       const std::string &producer) const {
    if (!std::filesystem::exists(out(relative)))
        throw DataError("missing artifact '" + relative + "'; run stage '" +
                        producer + "' first");
}

void Pipeline::write_manifest(const std::string &stage,
                              const std::vector<std::string> &inputs,
                              const std::vector<std::string> &outputs) const {
    StageManifest m;
    m.stage = stage;
    m.version = kVersion;
    m.config_hash = config_.hash();
    for (const auto &rel : inputs) m.inputs[rel] = hash_hex(hash_file(out(rel)));
    for (const auto &rel : outputs) m.outputs[rel] = hash_hex(hash_file(out(rel)));
    m.save(out("manifests") / (stage + ".json"));
}

void Pipeline::run_stage(const std::string &name) {
    const auto &names = stage_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown stage '" + name + "'");
    if (name == "gen") stage_gen();
    else if (name == "ingest") stage_ingest();
    else if (name == "project") stage_project();
    else if (name == "train") stage_train();
    else if (name == "shift") stage_shift();
    else if (name == "neighborhoods") stage_neighborhoods();
    else if (name == "smooth") stage_smooth();
    else if (name == "velocity") stage_velocity();
    else if (name == "forecast") stage_forecast();
    else if (name == "report") stage_report();
}

void Pipeline::run_all() {
    for (const auto &name : stage_names()) {
        if (name == "gen" && !config_.input_path.empty()) continue;
        std::cerr << "[embshift] stage " << name << "\n";
        run_stage(name);
    }
}

void Pipeline::stage_gen() {
    auto records = generate(config_.world);
    config_.world.save(out("world_spec.json"));
    std::ofstream csv(out("transactions.csv"));
    for (const auto &r : records)
        csv << r.account_id << ',' << r.merchant_id << ','
            << format_timestamp(r.timestamp) << ',' << r.category << '\n';
    csv.close();
    write_manifest("gen", {}, {"transactions.csv", "world_spec.json"});
}

void Pipeline::stage_ingest() {
    std::filesystem::path source = config_.input_path;
    std::vector<std::string> manifest_inputs;
    if (source.empty()) {
        require("transactions.csv", "gen");
        source = out("transactions.csv");
        manifest_inputs.push_back("transactions.csv");
    } else if (!std::filesystem::exists(source)) {
        throw DataError("input file " + source.string() + " does not exist");
    }

    std::ifstream in(source);
    IngestResult result = ingest(in, config_.ingest_format);

    std::ofstream csv(out("records.csv"));
    for (const auto &r : result.records)
        csv << r.account_id << ',' << r.merchant_id << ','
            << format_timestamp(r.timestamp) << ',' << r.category << '\n';
    csv.close();

    json report;
    report["records"] = result.records.size();
    report["errors"] = result.errors.size();
    report["error_lines"] = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(result.errors.size(), 20); ++i)
        report["error_lines"].push_back({{"line", result.errors[i].line_number},
                                         {"message", result.errors[i].message}});
    std::ofstream rep(out("ingest_report.json"));
    rep << report.dump(2) << '\n';
    rep.close();
    write_manifest("ingest", manifest_inputs, {"records.csv", "ingest_report.json"});
}

void Pipeline::stage_project() {
    require("records.csv", "ingest");
    std::ifstream in(out("records.csv"));
    IngestFormat canonical;  // records.csv is always comma, no header, 0..3
    IngestResult result = ingest(in, canonical);
    if (result.records.empty()) throw DataError("records.csv has no records");

    auto windows = window_partition(result.records, config_.window);
    std::filesystem::create_directories(out("pairs"));
    std::vector<std::string> outputs;
    for (const auto &[window, subset] : windows) {
        PairMultiset pairs = project(subset, config_.node_type, window);
        std::string rel = "pairs/" + pair_file(window.index);
        save_pairs(out(rel), pairs);
        outputs.push_back(rel);
    }

    // first-seen category per merchant, for the category-mix analytics
    std::map<std::string, std::string> categories;
    for (const auto &r : result.records)
        categories.emplace(r.merchant_id, r.category);
    std::ofstream cat(out("categories.tsv"));
    for (const auto &[node, category] : categories)
        cat << node << '\t' << category << '\n';
    cat.close();
    outputs.push_back("categories.tsv");
    write_manifest("project", {"records.csv"}, outputs);
}

std::vector<PairMultiset> Pipeline::load_pair_dir() const {
    std::vector<PairMultiset> out_pairs;
    for (const auto &path : sorted_dir(out("pairs"), ".pairs"))
        out_pairs.push_back(load_pairs(path));
    return out_pairs;
}

std::vector<EmbeddingSnapshot> Pipeline::load_snapshot_dir(
    const std::string &dir) const {
    std::vector<EmbeddingSnapshot> snaps;
    for (const auto &path : sorted_dir(out(dir), ".emb"))
        snaps.push_back(load_snapshot(path));
    return snaps;
}

void Pipeline::stage_train() {
    require("pairs", "project");
    auto pairs = load_pair_dir();
    if (pairs.empty()) throw DataError("no pair files under pairs/; run 'project'");
    auto snapshots = chain_train(pairs, config_.train);
    std::filesystem::create_directories(out("snapshots"));
    std::vector<std::string> inputs, outputs;
    for (std::size_t t = 0; t < pairs.size(); ++t)
        inputs.push_back("pairs/" + pair_file(static_cast<int>(t)));
    for (const auto &snap : snapshots) {
        std::string rel = "snapshots/" + snapshot_file(snap.timestamp_index);
        save_snapshot(out(rel), snap);
        outputs.push_back(rel);
    }
    write_manifest("train", inputs, outputs);
}

namespace {

std::map<std::string, std::string> load_categories(
    const std::filesystem::path &path) {
    std::map<std::string, std::string> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        auto tab = line.find('\t');
        if (tab == std::string::npos) continue;
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

void write_series_csv(const std::filesystem::path &path,
                      const std::map<std::string, ShiftSeries> &series) {
    std::ofstream csv(path);
    csv << "node_id,t,value\n";
    for (const auto &[node, s] : series)
        for (std::size_t t = 0; t < s.values.size(); ++t)
            if (s.defined(t))
                csv << node << ',' << t << ',' << fmt_double(s.values[t]) << '\n';
}

}  // namespace

void Pipeline::stage_shift() {
    require("snapshots", "train");
    auto snapshots = load_snapshot_dir("snapshots");
    if (snapshots.size() < 2)
        throw DataError("shift needs >= 2 snapshots on disk; run 'train'");
    require("categories.tsv", "project");
    auto categories = load_categories(out("categories.tsv"));
    auto pairs = load_pair_dir();

    auto magnitude = shift_series(snapshots, ShiftMetric::magnitude, 1);
    auto cosine = shift_series(snapshots, ShiftMetric::cosine, 1);
    std::filesystem::create_directories(out("shift"));
    write_series_csv(out("shift/magnitude_series.csv"), magnitude);
    write_series_csv(out("shift/cosine_series.csv"), cosine);

    std::size_t omitted = 0;
    auto max_months = max_shift_month(magnitude, &omitted);
    if (omitted > 0)
        std::cerr << "[embshift] max_shift_month: " << omitted
                  << " all-zero series omitted\n";
    {
        std::ofstream csv(out("shift/max_shift.csv"));
        csv << "node_id,t\n";
        for (const auto &[node, t] : max_months) csv << node << ',' << t << '\n';
    }
    {
        std::map<int, int> hist;
        for (const auto &[_, t] : max_months) hist[t] += 1;
        std::ofstream csv(out("shift/max_shift_histogram.csv"));
        csv << "t,count\n";
        for (const auto &[t, n] : hist) csv << t << ',' << n << '\n';
    }

    // top-shifting category mix per timestamp, trimmed to nodes that
    // received significant updates in that round
    {
        std::ofstream csv(out("shift/category_mix.csv"));
        csv << "t,category,top_fraction,base_fraction\n";
        for (std::size_t t = 1; t < snapshots.size(); ++t) {
            std::set<std::string> eligible;
            std::map<std::string, std::int64_t> weights;
            if (t < pairs.size()) weights = pairs[t].node_weights();
            for (const auto &node : snapshots[t].updated_this_round) {
                auto it = weights.find(node);
                if (it != weights.end() &&
                    it->second >= config_.analytics.trim_min_pair_count)
                    eligible.insert(node);
            }
            std::size_t ranked = 0;
            for (const auto &node : eligible) {
                auto it = cosine.find(node);
                if (it != cosine.end() && it->second.defined(t)) ++ranked;
            }
            if (ranked == 0) continue;
            std::size_t n_top = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(
                       config_.analytics.n_top_fraction *
                       static_cast<double>(ranked))));
            CategoryMix mix =
                top_shifting_category_mix(cosine, t, n_top, categories, eligible);
            for (const auto &[category, top] : mix.top_fraction) {
                double base = mix.base_fraction.count(category)
                                  ? mix.base_fraction.at(category)
                                  : 0.0;
                csv << t << ',' << category << ',' << fmt_double(top) << ','
                    << fmt_double(base) << '\n';
            }
        }
    }
    write_manifest("shift", {"categories.tsv"},
                   {"shift/magnitude_series.csv", "shift/cosine_series.csv",
                    "shift/max_shift.csv", "shift/max_shift_histogram.csv",
                    "shift/category_mix.csv"});
}

void Pipeline::stage_neighborhoods() {
    require("snapshots", "train");
    auto snapshots = load_snapshot_dir("snapshots");
    auto rows = overlap_curves(snapshots, config_.analytics.k_list,
                               config_.analytics.dt_list);
    std::filesystem::create_directories(out("shift"));
    std::ofstream csv(out("shift/overlap.csv"));
    csv << "t,k,delta_t,overlap\n";
    for (const auto &r : rows) {
        if (std::isnan(r.overlap)) continue;
        csv << r.t << ',' << r.k << ',' << r.delta_t << ','
            << fmt_double(r.overlap) << '\n';
    }
    csv.close();
    write_manifest("neighborhoods", {}, {"shift/overlap.csv"});
}

void Pipeline::stage_smooth() {
    require("snapshots", "train");
    auto snapshots = load_snapshot_dir("snapshots");
    SmoothOutcome outcome = smooth_embeddings(snapshots, config_.smooth);

    std::filesystem::create_directories(out("smoothed"));
    std::vector<std::string> outputs;
    for (const auto &snap : outcome.snapshots) {
        std::string rel = "smoothed/" + snapshot_file(snap.timestamp_index);
        save_snapshot(out(rel), snap);
        outputs.push_back(rel);
    }
    {
        std::ofstream txt(out("smoothed/passthrough.txt"));
        for (const auto &node : outcome.passthrough_nodes) txt << node << '\n';
        outputs.push_back("smoothed/passthrough.txt");
    }

    // per-timestamp cosine-shift noise comparison, raw vs smoothed
    {
        std::ofstream csv(out("smoothed/cosine_comparison.csv"));
        csv << "t,nodes,raw_mean,raw_var,smoothed_mean,smoothed_var\n";
        for (std::size_t t = 1; t < snapshots.size(); ++t) {
            std::vector<double> raw, smooth;
            for (const auto &[node, vp] : snapshots[t - 1].vectors) {
                if (outcome.passthrough_nodes.count(node)) continue;
                auto it = snapshots[t].vectors.find(node);
                if (it == snapshots[t].vectors.end()) continue;
                raw.push_back(delta_cosine(it->second, vp));
                smooth.push_back(delta_cosine(outcome.snapshots[t].vec(node),
                                              outcome.snapshots[t - 1].vec(node)));
            }
            if (raw.empty()) continue;
            auto stats = [](const std::vector<double> &xs) {
                double mean = 0;
                for (double x : xs) mean += x;
                mean /= static_cast<double>(xs.size());
                double var = 0;
                for (double x : xs) var += (x - mean) * (x - mean);
                var /= static_cast<double>(xs.size());
                return std::pair{mean, var};
            };
            auto [rm, rv] = stats(raw);
            auto [sm, sv] = stats(smooth);
            csv << t << ',' << raw.size() << ',' << fmt_double(rm) << ','
                << fmt_double(rv) << ',' << fmt_double(sm) << ','
                << fmt_double(sv) << '\n';
        }
        outputs.push_back("smoothed/cosine_comparison.csv");
    }
    write_manifest("smooth", {}, outputs);
}

void Pipeline::stage_velocity() {
    require("smoothed", "smooth");
    auto snapshots = load_snapshot_dir("smoothed");
    auto velocities = velocity(snapshots);
    std::ofstream csv(out("velocity.csv"));
    csv << "node_id,t";
    int d = snapshots.empty() ? 0 : snapshots[0].dim;
    for (int j = 0; j < d; ++j) csv << ",c" << j;
    csv << '\n';
    for (const auto &v : velocities) {
        csv << v.node_id << ',' << v.timestamp_index;
        for (double c : v.components) csv << ',' << fmt_double(c);
        csv << '\n';
    }
    csv.close();
    write_manifest("velocity", {}, {"velocity.csv"});
}

void Pipeline::stage_forecast() {
    require("snapshots", "train");
    auto snapshots = load_snapshot_dir("snapshots");
    auto cosine = shift_series(snapshots, ShiftMetric::cosine, 1);

    std::ofstream csv(out("forecast_results.csv"));
    csv << "sequence_length,training_length,model,mse\n";
    for (int l : config_.forecast_sequence_lengths) {
        ForecastConfig base_cfg = config_.forecast;
        base_cfg.sequence_length = l;
        base_cfg.training_length = 1;
        ExampleSets sets = make_examples(cosine, base_cfg);
        std::vector<double> preds, targets;
        for (const auto &ex : sets.test) {
            preds.push_back(baseline_moving_average(ex.window));
            targets.push_back(ex.target);
        }
        csv << l << ",0,baseline," << fmt_double(evaluate(preds, targets)) << '\n';

        for (int t_tr : config_.forecast_training_lengths) {
            ForecastConfig cfg = config_.forecast;
            cfg.sequence_length = l;
            cfg.training_length = t_tr;
            ExampleSets grid_sets = make_examples(cosine, cfg);
            LstmRegressor model = lstm_train(grid_sets.train, cfg);
            std::vector<double> p, y;
            for (const auto &ex : grid_sets.test) {
                p.push_back(model.forward(ex.window));
                y.push_back(ex.target);
            }
            csv << l << ',' << t_tr << ",lstm," << fmt_double(evaluate(p, y))
                << '\n';
        }
    }
    csv.close();
    write_manifest("forecast", {}, {"forecast_results.csv"});
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::size_t start = 0;
        while (true) {
            auto pos = line.find(',', start);
            if (pos == std::string::npos) {
                row.push_back(line.substr(start));
                break;
            }
            row.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void Pipeline::stage_report() {
    require("shift/max_shift_histogram.csv", "shift");
    require("shift/overlap.csv", "neighborhoods");
    require("smoothed/cosine_comparison.csv", "smooth");
    require("forecast_results.csv", "forecast");

    std::ofstream md(out("report.md"));
    md << "# Embedding shift report\n\n";
    md << "Config hash: `" << config_.hash() << "`\n\n";

    md << "## Max-shift month histogram\n\n| t | merchants |\n|---|---|\n";
    auto hist = read_csv(out("shift/max_shift_histogram.csv"));
    for (std::size_t i = 1; i < hist.size(); ++i)
        md << "| " << hist[i][0] << " | " << hist[i][1] << " |\n";

    md << "\n## Mean neighborhood overlap\n\n| k | delta_t | mean overlap |\n|---|---|---|\n";
    auto overlap = read_csv(out("shift/overlap.csv"));
    std::map<std::pair<int, int>, std::pair<double, int>> agg;
    for (std::size_t i = 1; i < overlap.size(); ++i) {
        auto &cell = agg[{std::stoi(overlap[i][1]), std::stoi(overlap[i][2])}];
        cell.first += std::stod(overlap[i][3]);
        cell.second += 1;
    }
    for (const auto &[key, cell] : agg) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", cell.first / cell.second);
        md << "| " << key.first << " | " << key.second << " | " << buf << " |\n";
    }

    md << "\n## Smoothing effect on cosine shift\n\n"
       << "| t | nodes | raw mean | raw var | smoothed mean | smoothed var |\n"
       << "|---|---|---|---|---|---|\n";
    auto cmp = read_csv(out("smoothed/cosine_comparison.csv"));
    for (std::size_t i = 1; i < cmp.size(); ++i) {
        md << "| " << cmp[i][0] << " | " << cmp[i][1];
        for (std::size_t j = 2; j < cmp[i].size(); ++j) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3g", std::stod(cmp[i][j]));
            md << " | " << buf;
        }
        md << " |\n";
    }

    md << "\n## Forecast MSE grid\n\n"
       << "| sequence length | training length | model | mse |\n|---|---|---|---|\n";
    auto fc = read_csv(out("forecast_results.csv"));
    for (std::size_t i = 1; i < fc.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", std::stod(fc[i][3]));
        md << "| " << fc[i][0] << " | " << fc[i][1] << " | " << fc[i][2] << " | "
           << buf << " |\n";
    }
    md.close();
    write_manifest("report",
                   {"shift/max_shift_histogram.csv", "shift/overlap.csv",
                    "smoothed/cosine_comparison.csv", "forecast_results.csv"},
                   {"report.md"});
}

}  // namespace embshift
