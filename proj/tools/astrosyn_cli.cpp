// astrosyn: run neuron-astrocyte experiments from a config file.
//
//   astrosyn run <config> [--scenario NAME] [--seed N] [--out DIR] [--set key=value ...]
//   astrosyn presets list
//   astrosyn validate <config>
//
// Exit status: 0 on success, 1 for configuration errors, 2 for simulation or
// output failures.

#include <cstdio>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "astrosyn/config.hpp"
#include "astrosyn/dynamics.hpp"
#include "astrosyn/experiment.hpp"

namespace {

constexpr int kConfigFailure = 1;
constexpr int kRunFailure = 2;

astrosyn::ExperimentConfig load(const std::string& path, const astrosyn::CliOverrides& overrides)
{
    return astrosyn::make_config(astrosyn::load_config_document(path), overrides);
}

void print_warnings(const astrosyn::ExperimentConfig& cfg)
{
    for (const auto& w : astrosyn::config_warnings(cfg)) std::cerr << "warning: " << w << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Neuron-astrocyte working-memory simulator"};
    app.set_version_flag("--version", astrosyn::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    astrosyn::CliOverrides overrides;
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("config", config_path, "Config file (JSON)")->required();
    auto* scenario_opt = run->add_option("--scenario", scenario, "Preset name; overrides the file");
    auto* seed_opt = run->add_option("--seed", seed, "Top-level random seed");
    auto* out_opt = run->add_option("--out", out_dir, "Output directory");
    run->add_option("--set", overrides.sets, "Override a config value, e.g. --set astrocyte.a_glu=4");

    auto* presets = app.add_subcommand("presets", "Inspect scenario presets");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "List preset names");

    auto* validate = app.add_subcommand("validate", "Check a config file without running it");
    validate->add_option("config", config_path, "Config file (JSON)")->required();
    validate->add_option("--set", overrides.sets, "Override a config value");

    CLI11_PARSE(app, argc, argv);

    if (*scenario_opt) overrides.scenario = scenario;
    if (*seed_opt) overrides.seed = seed;
    if (*out_opt) overrides.output_dir = out_dir;

    if (list->parsed()) {
        for (const auto& p : astrosyn::preset_catalog()) std::printf("%-24s %s\n", p.name.c_str(), p.description.c_str());
        return 0;
    }

    astrosyn::ExperimentConfig cfg;
    try {
        cfg = load(config_path, overrides);
    } catch (const astrosyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    }
    print_warnings(cfg);

    if (validate->parsed()) {
        std::cout << "ok: scenario " << cfg.scenario << '\n';
        return 0;
    }

    try {
        const auto result = astrosyn::run_experiment(cfg);
        std::cout << result.summary.dump(2) << '\n';
        for (const auto& f : result.files) std::cout << "wrote " << (std::filesystem::path(cfg.output_dir) / f).string() << '\n';
    } catch (const astrosyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const astrosyn::IntegrationError& e) {
        std::cerr << "integration failure: " << e.what() << '\n';
        return kRunFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRunFailure;
    }
    return 0;
}
