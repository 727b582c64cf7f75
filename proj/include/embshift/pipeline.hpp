#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "embshift/lstm.hpp"
#include "embshift/projection.hpp"
#include "embshift/sgns.hpp"
#include "embshift/synthgen.hpp"
#include "embshift/trajectory.hpp"
#include "embshift/transactions.hpp"

namespace embshift {

struct AnalyticsConfig {
    std::vector<int> k_list{10, 50, 100};
    std::vector<int> dt_list{2, 3, 4};
    double n_top_fraction = 0.1;
    std::int64_t trim_min_pair_count = 10;
};

struct PipelineConfig {
    std::filesystem::path out_dir = "out";
    std::filesystem::path input_path;  // external transactions; empty = use gen
    int threads = 1;
    std::uint64_t seed = 7;

    WorldSpec world = WorldSpec::demo(2000, 1000, 8, 24);
    IngestFormat ingest_format;
    WindowSpec window;
    NodeType node_type = NodeType::merchant;
    TrainConfig train;
    AnalyticsConfig analytics;
    SmoothOptions smooth;
    ForecastConfig forecast;
    std::vector<int> forecast_sequence_lengths{1, 3, 5, 7};
    std::vector<int> forecast_training_lengths{1, 3, 5, 7};

    static PipelineConfig load(const std::filesystem::path &path);

    // Derives module rng seeds from the global seed and pushes the thread
    // count into every stage config. Called once before running stages.
    void finalize();

    std::string hash() const;
};

class Pipeline {
  public:
    explicit Pipeline(PipelineConfig config);

    // Dependency-ordered stage list.
    static const std::vector<std::string> &stage_names();

    // Runs one named stage; throws ConfigError for unknown names and
    // DataError naming the stage to run first when inputs are missing.
    void run_stage(const std::string &name);

    void run_all();

  private:
    void stage_gen();
    void stage_ingest();
    void stage_project();
    void stage_train();
    void stage_shift();
    void stage_neighborhoods();
    void stage_smooth();
    void stage_velocity();
    void stage_forecast();
    void stage_report();

    std::filesystem::path out(const std::string &relative) const;
    void require(const std::string &relative, const std::string &producer) const;
    void write_manifest(const std::string &stage,
                        const std::vector<std::string> &inputs,
                        const std::vector<std::string> &outputs) const;

    std::vector<EmbeddingSnapshot> load_snapshot_dir(const std::string &dir) const;
    std::vector<PairMultiset> load_pair_dir() const;

    PipelineConfig config_;
};

}  // namespace embshift
