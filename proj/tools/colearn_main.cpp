#include "colearn/config.hpp"
#include "colearn/error.hpp"
#include "colearn/runner.hpp"
#include "colearn/util.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

namespace {

colearn::RunConfig load_config(const std::string& config_path,
                               const std::vector<std::string>& overrides) {
    colearn::RunConfig config;
    if (!config_path.empty()) config = colearn::parse_config_file(config_path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw colearn::config_error("--set expects key=value, got '" + kv + "'");
        colearn::apply_override(config, colearn::trim(kv.substr(0, eq)),
                                colearn::trim(kv.substr(eq + 1)));
    }
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized collaborative learning for wearable-sensor activity recognition"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string mode;
    std::string out_dir;
    long epochs = -1;
    long long seed = -1;
    int workers = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "config file (key = value lines)");
        cmd->add_option("--set", overrides, "override a config key (key=value, repeatable)");
        cmd->add_option("--mode", mode, "collab | isolated | centralized");
        cmd->add_option("--epochs", epochs, "number of local epochs");
        cmd->add_option("--seed", seed, "master seed");
        cmd->add_option("--workers", workers, "worker threads (does not affect results)");
        cmd->add_option("--out-dir", out_dir, "output directory");
    };

    auto* prepare = app.add_subcommand("prepare", "build the window cache for a config");
    add_common(prepare);

    auto* run = app.add_subcommand("run", "run the configured experiment");
    add_common(run);

    auto* compare = app.add_subcommand("compare", "join several run directories");
    std::vector<std::string> run_dirs;
    std::string compare_out = ".";
    compare->add_option("dirs", run_dirs, "run directories")->required();
    compare->add_option("--out", compare_out, "where to write comparison.csv and combined.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (compare->parsed()) {
            colearn::cmd_compare(run_dirs, compare_out);
            return 0;
        }

        auto config = load_config(config_path, overrides);
        if (!mode.empty()) colearn::apply_override(config, "mode", mode);
        if (epochs >= 0) colearn::apply_override(config, "epochs", std::to_string(epochs));
        if (seed >= 0) colearn::apply_override(config, "seed", std::to_string(seed));
        if (workers >= 0) colearn::apply_override(config, "workers", std::to_string(workers));
        if (!out_dir.empty()) colearn::apply_override(config, "out_dir", out_dir);
        config.validate();

        if (prepare->parsed()) {
            colearn::cmd_prepare(config);
        } else {
            colearn::cmd_run(config);
        }
        return 0;
    } catch (const colearn::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const colearn::data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
