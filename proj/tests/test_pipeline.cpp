#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "embshift/errors.hpp"
#include "embshift/manifest.hpp"
#include "embshift/pipeline.hpp"

using namespace embshift;

namespace {

PipelineConfig tiny_config(const std::filesystem::path &out_dir) {
    PipelineConfig config;
    config.out_dir = out_dir;
    config.seed = 7;
    config.world = WorldSpec::demo(120, 60, 4, 6);
    config.train.dim = 8;
    config.train.epochs = 2;
    config.analytics.k_list = {3, 5};
    config.analytics.dt_list = {2};
    config.analytics.trim_min_pair_count = 2;
    config.forecast.epochs = 5;
    config.forecast.hidden_units = 4;
    config.forecast_sequence_lengths = {2};
    config.forecast_training_lengths = {2};
    config.smooth.em_max_iters = 5;
    return config;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string &name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("run_all produces every artifact and manifest") {
    TempDir dir("embshift_pipeline_test");
    Pipeline pipeline(tiny_config(dir.path));
    pipeline.run_all();

    for (const char *rel :
         {"transactions.csv", "world_spec.json", "records.csv",
          "ingest_report.json", "categories.tsv", "velocity.csv",
          "forecast_results.csv", "report.md", "shift/magnitude_series.csv",
          "shift/cosine_series.csv", "shift/max_shift.csv",
          "shift/max_shift_histogram.csv", "shift/category_mix.csv",
          "shift/overlap.csv", "smoothed/passthrough.txt",
          "smoothed/cosine_comparison.csv"})
        CHECK_MESSAGE(std::filesystem::exists(dir.path / rel), rel);

    for (const auto &stage : Pipeline::stage_names()) {
        auto mpath = dir.path / "manifests" / (stage + ".json");
        REQUIRE_MESSAGE(std::filesystem::exists(mpath), stage);
        StageManifest m = StageManifest::load(mpath);
        CHECK(m.stage == stage);
        CHECK_FALSE(m.config_hash.empty());
        CHECK_FALSE(m.outputs.empty());
        // every recorded output hash matches the file on disk
        for (const auto &[rel, h] : m.outputs)
            CHECK(hash_hex(hash_file(dir.path / rel)) == h);
    }

    // one snapshot pair per month
    int snaps = 0;
    for (const auto &e :
         std::filesystem::directory_iterator(dir.path / "snapshots"))
        if (e.path().extension() == ".emb") ++snaps;
    CHECK(snaps == 6);
}

TEST_CASE("stages can be rerun in isolation with identical results") {
    TempDir dir("embshift_pipeline_isolated");
    PipelineConfig config = tiny_config(dir.path);
    {
        Pipeline pipeline(config);
        pipeline.run_all();
    }
    auto read_file = [](const std::filesystem::path &p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    std::string before = read_file(dir.path / "shift" / "cosine_series.csv");
    Pipeline again(config);
    again.run_stage("shift");
    CHECK(read_file(dir.path / "shift" / "cosine_series.csv") == before);
}

TEST_CASE("missing upstream artifacts point to the producing stage") {
    TempDir dir("embshift_pipeline_missing");
    Pipeline pipeline(tiny_config(dir.path));
    CHECK_THROWS_WITH_AS(pipeline.run_stage("train"), doctest::Contains("project"),
                         DataError);
    CHECK_THROWS_WITH_AS(pipeline.run_stage("shift"), doctest::Contains("train"),
                         DataError);
    CHECK_THROWS_AS(pipeline.run_stage("not-a-stage"), ConfigError);
}

TEST_CASE("config files load with overrides and stable hashing") {
    TempDir dir("embshift_pipeline_config");
    std::filesystem::create_directories(dir.path);
    auto cfg_path = dir.path / "config.json";
    {
        std::ofstream out(cfg_path);
        out << R"({
            "out_dir": ")" << (dir.path / "out").string() << R"(",
            "seed": 99,
            "world": {"n_accounts": 50, "n_merchants": 30, "n_categories": 3, "months": 5},
            "train": {"dim": 4, "epochs": 1},
            "node_type": "account",
            "analytics": {"k_list": [2], "dt_list": [1]}
        })";
    }
    PipelineConfig config = PipelineConfig::load(cfg_path);
    CHECK(config.seed == 99);
    CHECK(config.world.n_merchants == 30);
    CHECK(config.train.dim == 4);
    CHECK(config.node_type == NodeType::account);
    CHECK(config.analytics.k_list == std::vector<int>{2});
    // defaults survive when unspecified
    CHECK(config.train.negatives_per_positive == 5);

    std::string h1 = config.hash();
    CHECK(h1 == PipelineConfig::load(cfg_path).hash());
    config.seed = 100;
    CHECK(config.hash() != h1);

    CHECK_THROWS_AS(PipelineConfig::load(dir.path / "nope.json"), ConfigError);
    auto bad = dir.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(PipelineConfig::load(bad), ConfigError);
}

TEST_CASE("external input skips generation") {
    TempDir dir("embshift_pipeline_external");
    std::filesystem::create_directories(dir.path);
    auto txn = dir.path / "input.csv";
    {
        std::ofstream out(txn);
        for (int month = 1; month <= 5; ++month)
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 3; ++j)
                    out << "a" << i << ",m" << ((i + j) % 5) << ",2021-0" << month
                        << "-10,cat" << ((i + j) % 2) << "\n";
    }
    PipelineConfig config = tiny_config(dir.path / "out");
    config.input_path = txn;
    config.smooth.min_observations = 3;
    Pipeline pipeline(config);
    pipeline.run_stage("ingest");
    pipeline.run_stage("project");
    pipeline.run_stage("train");
    CHECK_FALSE(std::filesystem::exists(dir.path / "out" / "transactions.csv"));
    CHECK(std::filesystem::exists(dir.path / "out" / "snapshots"));
}
