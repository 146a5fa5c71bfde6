#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "exante/dgp.hpp"
#include "exante/dr.hpp"
#include "exante/returns.hpp"

namespace exante {

/// Synthetic design shared by the recovery and coverage checks: a
/// gaussian_linear population with a logistic taste shifter, so that the DR
/// model with `design` is correctly specified at every threshold below
/// Phi(1/nu).
struct AcceptanceSetup {
    DgpConfig dgp;
    ScenarioMix x_tilde;
    AttributeShift shift;
    DesignMap design;
    ThresholdGrid grid;
};

AcceptanceSetup acceptance_setup();

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    /// Measured quantities against their tolerances.
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240917;
    /// Coverage study size: 50 x 200 in full mode, 10 x 100 for selftest.
    int coverage_datasets = 50;
    int coverage_replicates = 200;
    /// Enforce the runtime limits stated for each criterion.
    bool check_runtime = true;
    /// Runtime limit for the coverage study in seconds.
    double coverage_time_limit = 1800.0;
    /// Minimum share of covered datasets. The selftest smoke study uses the
    /// 5% lower binomial quantile at 0.8 for its smaller dataset count.
    double coverage_min_rate = 0.8;
    /// Scratch directory for criterion 8 (two selftest runs).
    std::filesystem::path scratch;
    /// Path of a config file for the criterion 8 selftest runs.
    std::filesystem::path selftest_config;
};

/// Smallest k / n with Pr(Bin(n, 0.8) <= k) >= 0.05.
double smoke_coverage_rate(int n);

CriterionResult check_identity(const AcceptanceOptions& opt);
CriterionResult check_fq_recovery(const AcceptanceOptions& opt);
CriterionResult check_mu_iqr_recovery(const AcceptanceOptions& opt);
CriterionResult check_qwtp(const AcceptanceOptions& opt);
CriterionResult check_dr(const AcceptanceOptions& opt);
CriterionResult check_coverage(const AcceptanceOptions& opt);
CriterionResult check_policy(const AcceptanceOptions& opt);
CriterionResult check_determinism(const AcceptanceOptions& opt);

/// Runs the criteria listed in `ids` (all eight when empty) and prints one
/// line per criterion to `out` as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            const std::vector<int>& ids, std::ostream& out,
                                            bool print_time = true);

/// "[PASS] 3 mu_iqr_recovery: ..." with or without the elapsed time.
std::string format_result(const CriterionResult& r, bool with_time = true);

}  // namespace exante
