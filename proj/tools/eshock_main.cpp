#include <CLI11.hpp>
#include <iostream>

#include "eshock/cli.hpp"
#include "eshock/errors.hpp"

using namespace eshock;

int main(int argc, char** argv) {
    CLI::App app{"election-shock construction and local-projection estimation"};
    app.require_subcommand(1);

    std::string config_path, out_override, mutate;
    std::uint64_t seed_override = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
        cmd->add_option("--out", out_override, "output directory (overrides the config)");
        cmd->add_option("--seed", seed_override, "random seed (overrides the config)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    CLI::App* shocks = app.add_subcommand("shocks", "fit the probability equation and extract shocks");
    CLI::App* irf = app.add_subcommand("irf", "estimate impulse responses and render plots");
    CLI::App* narrative = app.add_subcommand("narrative", "build the event-window shock series");
    CLI::App* simulate = app.add_subcommand("simulate", "write a synthetic dataset with known truth");
    CLI::App* validate = app.add_subcommand("validate", "run the estimator property suite");
    for (CLI::App* cmd : {shocks, irf, narrative, simulate, validate}) add_common(cmd);
    validate->add_option("--mutate", mutate, "deliberately break one property (self-test)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig config = RunConfig::from_json_file(config_path);
        if (!out_override.empty()) config.out_dir = out_override;
        if (seed_set) {
            config.seed = seed_override;
            config.config_hash = fnv1a64(std::to_string(seed_override)) ^ config.config_hash;
        }

        if (shocks->parsed()) return cmd_shocks(config, std::cout);
        if (irf->parsed()) return cmd_irf(config, std::cout);
        if (narrative->parsed()) return cmd_narrative(config, std::cout);
        if (simulate->parsed()) return cmd_simulate(config, std::cout);
        if (validate->parsed()) return cmd_validate(config, std::cout, mutate);
        return 2;
    } catch (const InvalidConfig& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
