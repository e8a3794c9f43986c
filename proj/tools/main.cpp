#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ccgnav: safe navigation around uncertain obstacles"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string params;
    std::string level;
    std::optional<std::uint64_t> seed;
    bool force = false;

    app.add_option("--log", level, "Log level (trace, debug, info, warn, error, off)")
        ->envname("CCGNAV_LOG");

    auto* pre = app.add_subcommand("precompute", "Write estimator parameters per obstacle");
    pre->add_option("--config", config, "Scenario config")->required();
    pre->add_option("--out", out, "Output directory")->required();
    pre->add_flag("--force", force, "Overwrite existing files");

    auto* run = app.add_subcommand("run", "Simulate a scenario and write its trace");
    run->add_option("--config", config, "Scenario config")->required();
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--params", params, "Directory with precomputed params_<i>.json");
    run->add_flag("--force", force, "Overwrite existing files");

    std::uint64_t check_seed = 1;
    auto* check = app.add_subcommand("check", "Run the invariant suite");
    check->add_option("--config", config, "Scenario config whose estimator parameters to verify");
    check->add_option("--params", params, "Directory with params_<i>.json to verify");
    check->add_option("--seed", check_seed, "Seed of the randomized checks");

    for (auto* sub : {pre, run, check}) {
        sub->add_option("--log", level, "Log level")->envname("CCGNAV_LOG");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ccgnav::cli::kExitConfigError;
    }

    spdlog::set_level(level.empty() ? spdlog::level::info : spdlog::level::from_str(level));

    if (*pre) {
        return ccgnav::cli::cmd_precompute(config, out, force);
    }
    if (*run) {
        return ccgnav::cli::cmd_run(config, out, seed, force, params);
    }
    return ccgnav::cli::cmd_check(config, params, check_seed, std::cout);
}
