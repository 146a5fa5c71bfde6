#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "exante/config.hpp"

namespace exante {

struct Artifact {
    /// Path relative to the output directory, '/'-separated.
    std::string path;
    std::string sha256;
};

struct RunResult {
    std::vector<Artifact> artifacts;
    /// Nonzero when a selftest criterion failed.
    int exit_code = 0;
};

/// Commands: simulate, fit, curves, policy, selftest. Every artifact starts
/// with a "config_hash" header (a '#' line for CSV, a field for JSON), and
/// out_dir/manifest.json lists the SHA-256 of every file written so far.
/// Throws ConfigError for an unknown command; module errors propagate.
RunResult run_command(const std::string& command, const RunConfig& cfg, std::ostream& log);

RunResult run_simulate(const RunConfig& cfg, std::ostream& log);
RunResult run_fit(const RunConfig& cfg, std::ostream& log);
RunResult run_curves(const RunConfig& cfg, std::ostream& log);
RunResult run_policy(const RunConfig& cfg, std::ostream& log);
/// Reduced acceptance suite plus a small simulate/fit/curves/policy run in
/// out_dir/pipeline.
RunResult run_selftest(const RunConfig& cfg, std::ostream& log);

const std::vector<std::string>& command_names();

/// Reads out_dir/manifest.json as (path, sha256) pairs; empty if absent.
std::vector<Artifact> read_manifest(const std::filesystem::path& out_dir);

}  // namespace exante
