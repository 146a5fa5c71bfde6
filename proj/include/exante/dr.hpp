#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exante/dataset.hpp"

namespace exante {

/// Ordered feature constructors. Tokens: "intercept", an attribute name
/// ("wage_pub", "layoff_priv", ...) or a product "a*b" of two attribute names.
/// Wages enter divided by 100; employers as 0/1 indicators; other attributes raw.
class DesignMap {
public:
    explicit DesignMap(std::vector<std::string> features);

    /// intercept, wage_pub, wage_priv, wage_pub*wage_priv, employer_pub,
    /// employer_priv, hours_pub, hours_priv, layoff_pub, layoff_priv,
    /// promo_pub, promo_priv.
    static DesignMap default_map();
    static DesignMap intercept_only();

    /// Default map plus extra feature tokens.
    static DesignMap extended(const std::vector<std::string>& extra);

    std::size_t size() const { return features_.size(); }
    const std::vector<std::string>& features() const { return features_; }

    Eigen::VectorXd row(const Scenario& x) const;
    void row(const Scenario& x, double* out) const;

    bool operator==(const DesignMap& o) const { return features_ == o.features_; }

private:
    struct Term {
        std::optional<Attribute> first;
        std::optional<Attribute> second;
    };
    std::vector<std::string> features_;
    std::vector<Term> terms_;
};

/// Scaled attribute value used by the design map.
double design_value(const Scenario& x, Attribute a);

/// Increasing thresholds in (0, 1].
struct ThresholdGrid {
    std::vector<double> p;

    void check() const;

    /// Empirical quantiles of the stated probabilities at 0.02, 0.04, ..., 0.98
    /// plus 1, deduplicated, nonpositive values dropped.
    static ThresholdGrid from_quantiles(const Dataset& d);
    /// i/n for i = 1..n (so 1 is included).
    static ThresholdGrid uniform(int n);
};

struct ThresholdDiagnostics {
    double threshold = 0.0;
    double loglik = 0.0;
    int iterations = 0;
    bool separation = false;
    bool converged = true;
    /// All indicators equal: coefficients set to the clamped constant fit.
    bool degenerate = false;
};

constexpr double kProbClamp = 1e-6;

/// Fitted values across the grid at one scenario, after (optional)
/// rearrangement and clamping.
struct CdfProfile {
    const std::vector<double>* grid = nullptr;
    std::vector<double> values;

    double cdf_at(double p) const;
    double quantile_at(double a) const;
};

class DRModel {
public:
    DRModel(DesignMap map, ThresholdGrid grid, Eigen::MatrixXd coef,
            std::vector<ThresholdDiagnostics> diag, bool rearranged);

    const DesignMap& design() const { return map_; }
    const ThresholdGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& coefficients() const { return coef_; }
    const std::vector<ThresholdDiagnostics>& diagnostics() const { return diag_; }
    bool rearranged() const { return rearranged_; }
    void set_rearranged(bool r) { rearranged_ = r; }

    /// Fitted Lambda(W'beta(p_k)) for every threshold, clamped, not rearranged.
    std::vector<double> raw_values(const Scenario& x) const;
    CdfProfile profile(const Scenario& x) const;

    /// Step evaluation at the grid point nearest below p. p <= 0 gives 0,
    /// p >= 1 - 1e-8 gives 1, p below the first threshold gives 0.
    double cdf_at(double p, const Scenario& x) const;
    /// Smallest grid p with cdf_at(p, x) >= a.
    double quantile_at(double a, const Scenario& x) const;

private:
    DesignMap map_;
    ThresholdGrid grid_;
    Eigen::MatrixXd coef_;  // K x dim(W)
    std::vector<ThresholdDiagnostics> diag_;
    bool rearranged_ = false;
};

struct FitOptions {
    double ridge = 1e-6;
    int max_iterations = 100;
    double tolerance = 1e-8;
    double separation_index = 30.0;
    bool rearrange = true;
    bool parallel = true;
    /// Starting coefficients (K x dim(W)), e.g. the main fit for bootstrap refits.
    const Eigen::MatrixXd* warm_start = nullptr;
};

/// Per-threshold weighted, ridge-penalised logistic fits by Newton/IRLS.
/// The objective is the weight-normalised log-likelihood minus ridge * |beta|^2
/// (intercept unpenalised), so rescaling all weights leaves it unchanged.
/// `weights` empty means unit weights; otherwise one positive weight per record.
DRModel fit_dr(const Dataset& d, const ThresholdGrid& grid, const DesignMap& map,
               const std::vector<double>& weights = {}, const FitOptions& opt = {});

/// Sorting of fitted values across the grid at evaluation time.
DRModel rearrange(const DRModel& m);
std::vector<double> rearrange_values(std::vector<double> values);

struct BootstrapOptions {
    FitOptions fit;
    /// Debug mode: all weights equal to one.
    bool unit_weights = false;
    /// Warm-start every replicate at the main fit.
    const DRModel* main_fit = nullptr;
};

struct BootstrapResult {
    std::vector<DRModel> fits;
    /// Replicate numbers that were dropped, with the reason.
    std::vector<std::pair<int, std::string>> dropped;
};

/// Respondent-level standard exponential weights shared across a respondent's
/// records. Replicate b uses seed stream mix_seed(seed, b).
std::vector<double> bootstrap_weights(const Dataset& d, std::uint64_t seed, int replicate);

BootstrapResult bootstrap_fits(const Dataset& d, const ThresholdGrid& grid, const DesignMap& map,
                               int replicates, std::uint64_t seed,
                               const BootstrapOptions& opt = {});

std::string model_to_json(const DRModel& m);
DRModel model_from_json(const std::string& text);
std::string diagnostics_csv(const DRModel& m, const std::vector<std::string>& header = {});

}  // namespace exante
