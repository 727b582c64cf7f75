#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "embshift/errors.hpp"
#include "embshift/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string input_path;
    int threads = 0;
    std::int64_t seed = -1;
};

void add_common(CLI::App *cmd, CommonOpts &opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--input", opts.input_path, "external transactions file");
    cmd->add_option("--threads", opts.threads, "worker threads (1 = deterministic)");
    cmd->add_option("--seed", opts.seed, "global rng seed");
}

embshift::PipelineConfig build_config(const CommonOpts &opts) {
    embshift::PipelineConfig config;
    if (!opts.config_path.empty())
        config = embshift::PipelineConfig::load(opts.config_path);
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (!opts.input_path.empty()) config.input_path = opts.input_path;
    if (opts.threads > 0) config.threads = opts.threads;
    if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
    return config;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"temporally chained embedding shift toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::map<std::string, CLI::App *> stage_cmds;
    for (const auto &name : embshift::Pipeline::stage_names()) {
        CLI::App *cmd = app.add_subcommand(name, "run the '" + name + "' stage");
        add_common(cmd, opts);
        stage_cmds[name] = cmd;
    }
    CLI::App *run_all = app.add_subcommand("run-all", "run every stage in order");
    add_common(run_all, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e);
    }

    try {
        embshift::Pipeline pipeline(build_config(opts));
        if (run_all->parsed()) {
            pipeline.run_all();
        } else {
            for (const auto &[name, cmd] : stage_cmds)
                if (cmd->parsed()) pipeline.run_stage(name);
        }
        return 0;
    } catch (const embshift::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const embshift::DataError &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const embshift::NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
