// Runs the eight acceptance criteria at full size and prints one line each.
// Usage: exante_acceptance [--config path] [--scratch dir] [--only ids]
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exante/acceptance.hpp"

int main(int argc, char** argv) {
    CLI::App app{"exante acceptance suite"};
    exante::AcceptanceOptions opt;
    std::string config = EXANTE_DEFAULT_CONFIG;
    std::string scratch = (std::filesystem::temp_directory_path() / "exante_acceptance").string();
    std::vector<int> only;
    app.add_option("--config", config, "config used by the determinism check");
    app.add_option("--scratch", scratch, "scratch directory");
    app.add_option("--only", only, "criterion ids to run");
    app.add_option("--seed", opt.seed, "master seed");
    CLI11_PARSE(app, argc, argv);

    opt.selftest_config = config;
    opt.scratch = scratch;
    std::filesystem::create_directories(opt.scratch);

    const auto results = exante::run_acceptance(opt, only, std::cout);
    int failed = 0;
    for (const auto& r : results) failed += r.pass ? 0 : 1;
    std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
