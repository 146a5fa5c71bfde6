#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exante/dataset.hpp"
#include "exante/dgp.hpp"
#include "exante/dr.hpp"
#include "exante/inference.hpp"
#include "exante/policy.hpp"
#include "exante/returns.hpp"

namespace exante {

/// Evenly spaced grid lo..hi by step.
struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const { return uniform_grid(lo, hi, step); }
};

struct ThresholdSpec {
    /// "uniform" (i/n), "quantiles" (data quantiles) or "list".
    std::string kind = "uniform";
    int n = 200;
    std::vector<double> p;

    ThresholdGrid build(const Dataset& d) const;
};

struct ReturnsSpec {
    /// Defaults to the identified region of the first x_tilde scenario.
    std::optional<GridSpec> s_grid;
    double s_step = 5.0;
    std::vector<double> taus{0.25, 0.5, 0.75};
    std::optional<GridSpec> mu_grid;
    std::optional<GridSpec> iqr_grid;
    double iqr_tau1 = 0.25;
    double iqr_tau2 = 0.75;
    int a_points = 100;
    /// qWTP/mWTP are skipped when no shift is configured.
    std::optional<AttributeShift> shift;
    double qwtp_tau = 0.5;
    std::optional<GridSpec> wtp_grid;
    CopulaKind copula = CopulaKind::checkerboard;
    int copula_bins = 10;
};

struct SchemeSpec {
    std::string name;
    WeightKind kind = WeightKind::beta;
    double a = 1.0;
    double b = 1.0;
};

struct PolicySpec {
    std::vector<double> tau_grid = default_tau_grid();
    std::vector<SchemeSpec> schemes{{"baseline", WeightKind::beta, 1, 1},
                                    {"tails", WeightKind::beta, 2, 2},
                                    {"pessimism", WeightKind::beta, 5, 2},
                                    {"optimism", WeightKind::beta, 2, 5}};
    GridSpec x_grid{0.0, 0.1, 0.01};
    ElasticityConvention convention = ElasticityConvention::percentage_point;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = "out";
    /// Input data for `fit`; empty means the dataset written by `simulate`.
    std::filesystem::path dataset_path;
    CsvSchema schema;
    /// Fitted model for `curves` and `policy`; empty means out_dir/model.json.
    std::filesystem::path model_path;

    /// Attribute support; also attached to loaded datasets when given.
    std::optional<SupportSpec> support;
    DgpConfig dgp;
    std::uint64_t truth_seed = 7;

    DesignMap design = DesignMap::default_map();
    ThresholdSpec thresholds;
    double ridge = 1e-6;

    ScenarioMix x_tilde;
    ReturnsSpec returns;

    int bootstrap = 200;
    BandSpec band{0.9, BandKind::uniform};

    PolicySpec policy;

    /// Reduced coverage study run by `selftest`.
    int selftest_datasets = 10;
    int selftest_replicates = 100;

    /// Canonical JSON text; its SHA-256 is the config hash.
    std::string canonical;

    std::filesystem::path resolved_dataset() const;
    std::filesystem::path resolved_model() const;
    SGrid s_grid() const;
};

/// Parses a JSON config. Unknown keys are rejected. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Serialises every field (defaults included) to canonical JSON.
std::string config_to_json(const RunConfig& cfg);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);
std::string config_hash(const RunConfig& cfg);

Scenario scenario_from_json_text(const std::string& text);

}  // namespace exante
