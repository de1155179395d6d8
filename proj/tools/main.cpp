#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "easched/experiment.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
    std::vector<std::uint64_t> seeds;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        std::string field = csv.substr(start, comma - start);
        if (field.empty()) throw easched::ConfigError("--seeds: empty entry in '" + csv + "'");
        try {
            seeds.push_back(std::stoull(field));
        } catch (const std::exception&) {
            throw easched::ConfigError("--seeds: not a seed: '" + field + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (seeds.empty()) throw easched::ConfigError("--seeds: empty list");
    return seeds;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-aware task-scheduling simulator and experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string seeds_csv;
    CLI::App* run = app.add_subcommand("run", "Run the (scheduler x seed) grid from a config");
    run->add_option("--config", config_path, "Experiment config JSON")->required();
    run->add_option("--out", out_dir, "Override the config's output directory");
    run->add_option("--seeds", seeds_csv, "Override seeds (comma-separated)");

    std::vector<std::string> summary_paths;
    CLI::App* cmp = app.add_subcommand("compare", "Compare summary files from one workload");
    cmp->add_option("summaries", summary_paths, "Summary JSON files (at least 2)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            easched::ExperimentConfig config = easched::load_experiment_config(config_path);
            if (!out_dir.empty()) config.output_dir = out_dir;
            if (!seeds_csv.empty()) config.seeds = parse_seed_list(seeds_csv);

            easched::ExperimentResult result = easched::run_experiment(config);
            for (const auto& file : result.written_files) {
                std::cout << "wrote " << file << "\n";
            }
            if (!result.failed_cells.empty()) {
                for (const auto& cell : result.failed_cells) {
                    std::cerr << "cell failed: " << cell.scheduler << " seed " << cell.seed
                              << ": " << cell.error << "\n";
                }
                return 2;
            }
            return 0;
        }
        std::cout << easched::compare_summary_files(summary_paths);
        return 0;
    } catch (const easched::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
