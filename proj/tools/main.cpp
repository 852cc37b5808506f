#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stosew/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"stosew: stochastic sewing Monte Carlo experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir_override;
    std::int64_t seed_override = -1;
    auto* run = app.add_subcommand("run", "run an experiment from a TOML config");
    run->add_option("config", config_path, "path to the experiment config")->required();
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--outdir", outdir_override, "override the output directory");

    auto* list = app.add_subcommand("list", "list registered experiments");

    std::string describe_name;
    auto* describe = app.add_subcommand("describe", "show an experiment and its defaults");
    describe->add_option("name", describe_name, "experiment name")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        std::optional<std::uint64_t> seed;
        if (seed_override >= 0) seed = std::uint64_t(seed_override);
        auto outcome = stosew::run_config_file(config_path, seed, outdir_override);
        if (!outcome.output_dir.empty())
            std::cout << "output: " << outcome.output_dir << "\n";
        std::cout << outcome.message << "\n";
        return outcome.exit_code;
    }

    if (list->parsed()) {
        for (const auto& e : stosew::experiment_registry()) {
            std::printf("%-24s %s\n", e.name.c_str(), e.description.c_str());
            std::printf("%-24s   verifies: %s\n", "", e.statement.c_str());
        }
        std::printf("total: %zu experiments\n", stosew::experiment_registry().size());
        return 0;
    }

    if (describe->parsed()) {
        const auto* e = stosew::find_experiment(describe_name);
        if (!e) {
            std::cerr << "unknown experiment: " << describe_name << "\n";
            return 2;
        }
        std::cout << e->name << ": " << e->description << "\n";
        std::cout << "verifies: " << e->statement << "\n\n";
        std::cout << "# default config\n" << stosew::default_config_toml(*e);
        return 0;
    }
    return 0;
}
