// Scenario runner: run <scenario-file> [--seed N] [--out DIR], plots <run-dir>, list-scenarios.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kahler/cli.hpp"

#ifndef KAHLER_SCENARIO_DIR
#define KAHLER_SCENARIO_DIR "scenarios"
#endif

int main(int argc, char** argv) {
    namespace cli = kahler::cli;
    CLI::App app{"Kahler-Ricci flow and Harnack quantity experiments"};
    app.set_version_flag("--version", cli::kToolVersion);
    app.require_subcommand(1);

    std::string scenario_file, out_dir;
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("scenario-file", scenario_file, "JSON scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the seed of every scenario");
    run->add_option("--out", out_dir, "output directory (default runs/<file stem>)");

    std::string run_dir;
    auto* plots = app.add_subcommand("plots", "write plot_data.csv for a finished run");
    plots->add_option("run-dir", run_dir, "directory holding manifest.jsonl")->required();

    std::string scenario_dir = KAHLER_SCENARIO_DIR;
    auto* list = app.add_subcommand("list-scenarios", "list the bundled scenarios");
    list->add_option("--dir", scenario_dir, "scenario directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kParseFailure;
    }

    if (*run) {
        cli::RunOptions o;
        if (*seed_opt) o.seed = seed;
        o.out = out_dir.empty() ? std::filesystem::path("runs") / std::filesystem::path(scenario_file).stem() : std::filesystem::path(out_dir);
        return cli::run_scenarios(scenario_file, o, std::cerr);
    }
    if (*plots) return cli::emit_plot_data(run_dir, std::cerr);
    return cli::list_scenarios(scenario_dir, std::cout, std::cerr);
}
