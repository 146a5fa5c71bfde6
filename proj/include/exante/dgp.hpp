#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "exante/curve.hpp"
#include "exante/dataset.hpp"
#include "exante/numerics.hpp"

namespace exante {

enum class DgpKind { ces_lognormal, gaussian_linear };

std::string to_string(DgpKind k);
DgpKind parse_dgp_kind(const std::string& s);

/// Scalar population law: degenerate(a), uniform(a,b), normal(mean a, sd b),
/// logistic(location a, scale b).
struct ParamDist {
    enum class Kind { degenerate, uniform, normal, logistic };
    Kind kind = Kind::degenerate;
    double a = 0.0;
    double b = 0.0;

    static ParamDist fixed(double v) { return {Kind::degenerate, v, 0.0}; }
    double draw(Rng& rng) const;
    double lower() const;
    double upper() const;
    double mean() const;
    void check(const std::string& name) const;
};

std::string to_string(ParamDist::Kind k);
ParamDist::Kind parse_param_kind(const std::string& s);

/// Scenario sampler used by simulate_survey: wages uniform on the support
/// lattice, numeric attributes uniform over their levels, employers uniform.
Scenario sample_scenario(const SupportSpec& support, Rng& rng);

struct DgpConfig {
    DgpKind kind = DgpKind::gaussian_linear;

    // Preference and belief parameters eta = (alpha, beta, rho) plus a taste
    // shifter theta for the option-1 amenity.
    ParamDist alpha = ParamDist::fixed(0.5);
    ParamDist beta = ParamDist::fixed(1.0);
    ParamDist rho = ParamDist::fixed(0.0);
    ParamDist taste = ParamDist::fixed(0.0);

    // gaussian_linear: amenity difference a1 - a0 ~ N(M, sd^2) with
    //   M  = mu_a + theta + sum_j gamma_j (1 + kappa_j theta) z_j
    //   sd = sigma_a + nu theta (floored at sigma_floor)
    // and amenity weight k(z) = k / (1 + sum_j lambda_j z_j), k = (1-alpha)/alpha.
    double mu_a = 0.0;
    double sigma_a = 100.0;
    double nu = 0.0;
    double sigma_floor = 1e-6;
    std::map<Attribute, double> gamma;
    std::map<Attribute, double> kappa;
    std::map<Attribute, double> lambda;

    // ces_lognormal: log a0 ~ N(m0, s0^2), log a1 ~ N(m1 + theta + gamma'z, s1^2),
    // correlation rho.
    double ces_m0 = 0.0;
    double ces_s0 = 0.5;
    double ces_m1 = 0.0;
    double ces_s1 = 0.5;
    /// Admit beta <= 0 (Box-Cox utility comparison, signed power for S).
    bool signed_power = false;
    int quadrature_nodes = 512;

    // Survey design.
    SupportSpec support;
    int scenarios_per_respondent = 2;
    std::size_t respondents = 1000;
    bool round_p = false;

    // Brute-force oracle budget.
    std::size_t oracle_draws = 200000;

    /// Throws DgpError naming the offending parameter.
    void check() const;
};

struct Eta {
    double alpha = 0.5;
    double beta = 1.0;
    double rho = 0.0;
    double theta = 0.0;
    double k() const { return (1.0 - alpha) / alpha; }
};

struct PopulationDraw {
    std::vector<Eta> eta;
    std::uint64_t seed = 0;
};

/// Draw for respondent i uses its own counter-based stream, so the first n
/// draws do not depend on the population size.
PopulationDraw draw_population(const DgpConfig& cfg, std::uint64_t seed);
Eta draw_eta(const DgpConfig& cfg, std::uint64_t seed, std::uint64_t index);

/// Pr(S(x, eta*) >= 0 | eta): the stated demand.
double stated_demand_m(const Scenario& x, const Eta& eta, const DgpConfig& cfg);

/// F_{S,i}(s; x) computed directly from the belief distribution of S (not via
/// the stated demand).
double belief_cdf_S(double s, const Scenario& x, const Eta& eta, const DgpConfig& cfg);

/// tau-quantile of the belief distribution of S.
double belief_quantile_S(double tau, const Scenario& x, const Eta& eta, const DgpConfig& cfg);

/// Mean of the belief distribution of S.
double belief_mean_S(const Scenario& x, const Eta& eta, const DgpConfig& cfg);

/// Realised S for a given amenity pair (ces) or amenity difference (gaussian,
/// a1 - a0 = `a1`, `a0` ignored). Throws DgpError for a nonpositive CES base.
double realized_S(const Scenario& x, const Eta& eta, double a0, double a1, const DgpConfig& cfg);

/// Draws one amenity pair (a0, a1) from the belief distribution given eta
/// and z. For gaussian_linear a0 = 0 and a1 is the amenity difference.
std::pair<double, double> draw_amenities(const Scenario& x, const Eta& eta,
                                         const DgpConfig& cfg, Rng& rng);

Dataset simulate_survey(const PopulationDraw& pop, const DgpConfig& cfg, std::uint64_t seed);

/// Finite distribution of counterfactual scenarios.
struct WeightedScenario {
    Scenario x;
    double mass = 1.0;
};
using ScenarioMix = std::vector<WeightedScenario>;

/// Brute-force population cdf of an individual-level summary g(eta, x, i) on
/// `grid`: sum_j mass_j * mean_i 1{g(eta_i, x_j) <= grid}. Uses cfg.oracle_draws
/// population draws from `seed`.
template <class Summary>
ReturnsCurve brute_force_cdf(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                             const std::vector<double>& grid, std::uint64_t seed,
                             Summary&& g);

ReturnsCurve true_FQ(const DgpConfig& cfg, double tau, const std::vector<double>& s_grid,
                     const ScenarioMix& x_tilde, std::uint64_t seed);
ReturnsCurve true_dist_mu(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                          const std::vector<double>& y_grid, std::uint64_t seed);
ReturnsCurve true_dist_iqr(const DgpConfig& cfg, const ScenarioMix& x_tilde, double tau1,
                           double tau2, const std::vector<double>& y_grid, std::uint64_t seed);
/// qWTP(h) = Q_S(tau; x+h) - Q_S(tau; x) per individual.
ReturnsCurve true_dist_qwtp(const DgpConfig& cfg, const ScenarioMix& x_tilde, Attribute h,
                            double delta, double tau, const std::vector<double>& y_grid,
                            std::uint64_t seed);
ReturnsCurve true_dist_mwtp(const DgpConfig& cfg, const ScenarioMix& x_tilde, Attribute h,
                            double delta, const std::vector<double>& y_grid,
                            std::uint64_t seed);

/// Pr(P <= p | x) under the population law, by brute force over cfg.oracle_draws.
double true_conditional_cdf(const DgpConfig& cfg, double p, const Scenario& x,
                            std::uint64_t seed);

struct TruePolicyObjects {
    ReturnsCurve fs;
    /// Realised-S cdf at the same grid by simulating eta* given eta.
    ReturnsCurve realized;
};

/// F_S = mean over tau_grid of omega_tau * F_Q(.; tau) by brute force.
TruePolicyObjects true_policy_objects(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                                      const std::vector<double>& tau_grid,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& s_grid, std::uint64_t seed);

}  // namespace exante

#include "exante/detail/dgp_impl.hpp"
