#include <CLI11.hpp>
#include <iostream>

#include "tcbo/config.hpp"
#include "tcbo/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Transition-constrained Bayesian optimization benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::int64_t seed_override = -1;
    int replicates_override = 0;
    auto* run = app.add_subcommand("run", "Run a benchmark campaign from a config file");
    run->add_option("--config", config_path, "Path to the run config")->required();
    run->add_option("--seed", seed_override, "Override the base seed");
    run->add_option("--replicates", replicates_override, "Override the replicate count");

    auto* list = app.add_subcommand("list-benchmarks", "List the registered benchmarks");

    std::string input_dir, output_csv;
    auto* summarize = app.add_subcommand("summarize", "Aggregate JSONL logs into a summary CSV");
    summarize->add_option("--input", input_dir, "Directory of per-replicate JSONL files")->required();
    summarize->add_option("--output", output_csv, "Summary CSV path (default <input>/summary.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (*list) {
            for (const auto& name : tcbo::benchmark_registry()) std::cout << name << "\n";
            return 0;
        }
        if (*summarize) {
            if (output_csv.empty()) output_csv = input_dir + "/summary.csv";
            tcbo::summarize_directory(input_dir, output_csv);
            std::cout << output_csv << "\n";
            return 0;
        }
        tcbo::RunConfig cfg = tcbo::RunConfig::from_file(config_path);
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (replicates_override > 0) cfg.replicates = replicates_override;
        const tcbo::RunOutput out = tcbo::run_benchmark(cfg);
        for (const auto& f : out.replicate_files) std::cout << f << "\n";
        std::cout << out.summary_file << "\n";
        return 0;
    } catch (const tcbo::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
