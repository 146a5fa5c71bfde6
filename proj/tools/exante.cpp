#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "exante/config.hpp"
#include "exante/error.hpp"
#include "exante/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ex-ante returns: simulate, fit, curves, policy, selftest"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> bootstrap;
    std::optional<std::string> out;

    for (const auto& name : exante::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_option("--bootstrap", bootstrap, "override the bootstrap replicate count");
        sub->add_option("--out", out, "override the output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        exante::RunConfig cfg = exante::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (bootstrap) cfg.bootstrap = *bootstrap;
        if (out) cfg.out_dir = *out;
        cfg.canonical = exante::config_to_json(cfg);
        const exante::RunResult r = exante::run_command(command, cfg, std::cerr);
        for (const auto& a : r.artifacts) std::cout << a.sha256 << "  " << a.path << "\n";
        return r.exit_code;
    } catch (const exante::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
