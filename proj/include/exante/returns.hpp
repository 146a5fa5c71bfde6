#pragma once

#include <string>
#include <vector>

#include "exante/curve.hpp"
#include "exante/dataset.hpp"
#include "exante/dgp.hpp"
#include "exante/dr.hpp"

namespace exante {

/// Transfer grid s (kCFA) with the support used for identified-region masks.
struct SGrid {
    std::vector<double> s;
    SupportSpec support;

    /// Throws ReturnsError unless strictly increasing and containing 0.
    void check() const;

    /// Multiples of `step` spanning [min y0 - max y0, max y0 - min y0] of the
    /// option-0 wage support.
    static SGrid from_support(const SupportSpec& support, double step);
    static SGrid uniform(const SupportSpec& support, double lo, double hi, double step);

    /// True where x shifted by s lies outside the support.
    std::vector<bool> extrapolated(const Scenario& x) const;

    /// Trapezoid weights: step/2 at the two ends, cell width inside.
    std::vector<double> weights() const;
};

/// Midpoints (i + 0.5) / n, i = 0..n-1.
std::vector<double> midpoint_grid(int n);

/// Fitted conditional cdf profiles of P at every t(s, x) on the grid. Outside
/// the identified region the profile at the nearest identified s is used
/// (flat extrapolation) and the point is flagged.
class ProfileTable {
public:
    ProfileTable(const DRModel& m, const Scenario& x, const SGrid& grid);

    std::size_t size() const { return profiles_.size(); }
    /// q(t(s_j, x), a): the a-quantile of P at the shifted scenario.
    double q(std::size_t j, double a) const { return profiles_[j].quantile_at(a); }
    const std::vector<bool>& extrapolated() const { return extrapolated_; }

private:
    std::vector<CdfProfile> profiles_;
    std::vector<bool> extrapolated_;
};

/// Value of an A-integral plus the integrand at both ends of the s-grid.
struct AIntegral {
    double value = 0.0;
    double integrand_first = 0.0;
    double integrand_last = 0.0;
};

/// Indicator 1{1 - q <= tau}, evaluated as q >= 1 - tau with a 1e-12 tie margin.
bool quantile_above(double q, double tau);

AIntegral a_mu(const ProfileTable& t, const SGrid& grid, double a);
AIntegral a_tau(const ProfileTable& t, const SGrid& grid, double a, double tau);
/// Sum of w_j 1{1 - tau2 <= q < 1 - tau1}; equals a_tau(tau2) - a_tau(tau1).
AIntegral a_iqr(const ProfileTable& t, const SGrid& grid, double a, double tau1, double tau2);

AIntegral a_mu(const DRModel& m, const Scenario& x, double a, const SGrid& grid);
AIntegral a_tau(const DRModel& m, const Scenario& x, double a, double tau, const SGrid& grid);
AIntegral a_iqr(const DRModel& m, const Scenario& x, double a, double tau1, double tau2,
                const SGrid& grid);

/// F_Q(s; tau, x_tilde) = sum_j mass_j cdf_at(1 - tau, t(s, x_j)), isotonic in s.
ReturnsCurve fq_curve(const DRModel& m, double tau, const SGrid& grid,
                      const ScenarioMix& x_tilde);

ReturnsCurve dist_mu(const DRModel& m, const ScenarioMix& x_tilde, const std::vector<double>& y_grid,
                     const SGrid& s_grid, int a_points = 100);
ReturnsCurve dist_iqr(const DRModel& m, const ScenarioMix& x_tilde, double tau1, double tau2,
                      const std::vector<double>& y_grid, const SGrid& s_grid, int a_points = 100);

struct RankPair {
    std::string respondent_id;
    double v1 = 0.0;
    double v2 = 0.0;
    Scenario x1;
    Scenario x2;
};

struct RankPairs {
    std::vector<RankPair> pairs;
};

/// Which two scenarios of a respondent form the pair.
struct PairRule {
    /// Empty: the two lowest scenario indices. Otherwise the given indices.
    int first = 0;
    int second = 0;
};

/// V_k = cdf_at(P_k, X_k) for each respondent with at least two scenarios.
RankPairs pseudo_ranks(const DRModel& m, const Dataset& d, const PairRule& rule = {});

enum class CopulaKind { independence, comonotone, checkerboard, empirical };
std::string to_string(CopulaKind k);
CopulaKind parse_copula_kind(const std::string& s);

struct CopulaAtom {
    double v1;
    double v2;
    double mass;
};

struct CopulaModel {
    CopulaKind kind = CopulaKind::independence;
    int bins = 10;
    /// Row-major bins x bins masses (independence and checkerboard).
    std::vector<double> masses;
    /// Support points used by the WTP integrals; masses sum to one.
    std::vector<CopulaAtom> atoms;

    double mass(int i, int j) const { return masses[static_cast<std::size_t>(i * bins + j)]; }
    /// Spearman's rho of the copula (bins treated as uniform cells).
    double spearman() const;
};

/// kind = checkerboard needs >= 50 pairs. comonotone uses `a_points`
/// diagonal atoms.
CopulaModel fit_copula(const RankPairs& pairs, CopulaKind kind, int bins = 10,
                       int a_points = 100);

/// Attribute shift h.
struct AttributeShift {
    Attribute attribute = Attribute::layoff_pub;
    double delta = 0.0;
};

ReturnsCurve dist_qwtp(const DRModel& m, const CopulaModel& copula, const ScenarioMix& x_tilde,
                       const AttributeShift& h, double tau, const std::vector<double>& y_grid,
                       const SGrid& s_grid);
ReturnsCurve dist_mwtp(const DRModel& m, const CopulaModel& copula, const ScenarioMix& x_tilde,
                       const AttributeShift& h, const std::vector<double>& y_grid,
                       const SGrid& s_grid);

}  // namespace exante
