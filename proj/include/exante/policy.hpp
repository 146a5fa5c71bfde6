#pragma once

#include <string>
#include <vector>

#include "exante/curve.hpp"

namespace exante {

enum class WeightKind { uniform, beta, point_mass };

std::string to_string(WeightKind k);
WeightKind parse_weight_kind(const std::string& s);

/// Quantile weights omega_tau on a tau grid, averaging to one.
struct WeightScheme {
    std::string name;
    WeightKind kind = WeightKind::uniform;
    /// Beta(a, b) parameters, or the location of the point mass in `a`.
    double a = 1.0;
    double b = 1.0;
    std::vector<double> tau;
    std::vector<double> omega;
};

/// 0.05, 0.10, ..., 0.95.
std::vector<double> default_tau_grid();

/// beta: Beta(a,b) density on the grid rescaled to mean one; uniform: all
/// ones; point_mass: all weight on the grid point nearest to `a`.
WeightScheme make_weights(WeightKind kind, double a, double b, const std::vector<double>& tau_grid,
                          const std::string& name = "");

/// baseline Beta(1,1), tails Beta(2,2), pessimism Beta(5,2), optimism Beta(2,5).
std::vector<WeightScheme> default_schemes(const std::vector<double>& tau_grid);

/// F_S(s) = mean_t omega_t F_Q(s; tau_t), then isotonic in s. One curve per
/// scheme tau, matched by the curve parameter.
ReturnsCurve predict_fs(const std::vector<ReturnsCurve>& fq_curves, const WeightScheme& w);

/// Linear interpolation of a tabulated curve (flat outside the grid).
double interpolate(const ReturnsCurve& c, double g);

struct Inversion {
    double value = 0.0;
    /// q at or below the smallest curve value: value is the left grid end.
    bool left_boundary = false;
};

/// Generalised inverse with linear interpolation between bracketing grid
/// points. Throws PolicyError when q exceeds the largest curve value.
Inversion invert_fs(const ReturnsCurve& fs, double q);

struct CostRow {
    double x = 0.0;
    /// Marginal transfer F_S^{-1}[F_S(0) + x] (kCFA).
    double transfer = 0.0;
    /// (F_S(0) + x) * transfer, per worker in the market.
    double transfer_cost = 0.0;
    /// transfer_cost relative to the baseline bill F_S(0) * baseline_wage.
    double cost_multiplier = 0.0;
    bool left_boundary = false;
};

struct CostTable {
    std::string scheme;
    double f0 = 0.0;
    double baseline_wage = 0.0;
    std::vector<CostRow> rows;
};

CostTable transfer_cost_curve(const ReturnsCurve& fs, const std::vector<double>& x_grid,
                              double baseline_wage, const std::string& scheme = "");

enum class ElasticityConvention {
    /// Percent change of the wage bill per one-point increase of the hired share.
    percentage_point,
    /// Percent change of the wage bill over percent change of the hired share.
    proportional,
};

/// Uses the row at x = 0.01; throws PolicyError when it is missing.
double cost_elasticity(const CostTable& table,
                       ElasticityConvention convention = ElasticityConvention::percentage_point);

/// Rows x, transfer_kcfa, transfer_cost, cost_multiplier, scheme.
std::string cost_tables_csv(const std::vector<CostTable>& tables,
                            const std::vector<std::string>& header = {});

}  // namespace exante
