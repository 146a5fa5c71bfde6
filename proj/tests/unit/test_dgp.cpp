#include <gtest/gtest.h>

#include <cmath>

#include "exante/dgp.hpp"
#include "exante/error.hpp"
#include "exante/numerics.hpp"

using namespace exante;

namespace {

DgpConfig degenerate_gaussian() {
    DgpConfig c;
    c.kind = DgpKind::gaussian_linear;
    c.alpha = ParamDist::fixed(0.5);
    c.mu_a = 0.0;
    c.sigma_a = 100.0;
    c.oracle_draws = 2000;
    return c;
}

}  // namespace

TEST(Population, Deterministic) {
    DgpConfig c = degenerate_gaussian();
    c.alpha = {ParamDist::Kind::uniform, 0.2, 0.8};
    c.respondents = 3;
    const auto a = draw_population(c, 7);
    const auto b = draw_population(c, 7);
    ASSERT_EQ(a.eta.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.eta[i].alpha, b.eta[i].alpha);
}

TEST(Population, DegenerateAlpha) {
    DgpConfig c = degenerate_gaussian();
    c.respondents = 50;
    for (const auto& e : draw_population(c, 3).eta) EXPECT_EQ(e.alpha, 0.5);
}

TEST(Population, UniformAlphaMean) {
    DgpConfig c = degenerate_gaussian();
    c.alpha = {ParamDist::Kind::uniform, 0.2, 0.8};
    c.respondents = 10000;
    double mean = 0.0;
    for (const auto& e : draw_population(c, 11).eta) mean += e.alpha;
    mean /= 10000.0;
    EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(Population, InvalidParametersRejected) {
    DgpConfig c = degenerate_gaussian();
    c.alpha = {ParamDist::Kind::uniform, 0.8, 0.2};
    EXPECT_THROW(draw_population(c, 1), DgpError);
}

TEST(StatedDemand, GaussianSymmetry) {
    const DgpConfig c = degenerate_gaussian();
    Scenario x;
    x.wage_pub = 600;
    x.wage_priv = 600;
    EXPECT_NEAR(stated_demand_m(x, Eta{}, c), 0.5, 1e-14);
}

TEST(StatedDemand, GaussianNormalCdf) {
    const DgpConfig c = degenerate_gaussian();
    Scenario x;
    x.wage_pub = 600;
    x.wage_priv = 500;
    EXPECT_NEAR(stated_demand_m(x, Eta{}, c), normal_cdf(1.0), 1e-12);
    EXPECT_NEAR(normal_cdf(1.0), 0.8413447460685429, 1e-15);
}

TEST(StatedDemand, CesWithoutAmenityDifference) {
    DgpConfig c;
    c.kind = DgpKind::ces_lognormal;
    c.ces_m0 = c.ces_m1 = std::log(200.0);
    c.ces_s0 = c.ces_s1 = 1e-9;
    c.rho = ParamDist::fixed(0.9);
    Scenario x;
    x.wage_pub = 700;
    x.wage_priv = 500;
    EXPECT_NEAR(stated_demand_m(x, Eta{}, c), 1.0, 1e-9);
    x.wage_pub = 400;
    EXPECT_NEAR(stated_demand_m(x, Eta{}, c), 0.0, 1e-9);
}

TEST(StatedDemand, BeliefDemandIdentityGaussian) {
    DgpConfig c = degenerate_gaussian();
    c.taste = {ParamDist::Kind::logistic, 0.0, 50.0};
    c.nu = 0.2;
    c.gamma[Attribute::layoff_pub] = -200.0;
    Rng rng = make_rng(3, 0);
    for (int i = 0; i < 10; ++i) {
        const Scenario x = sample_scenario(c.support, rng);
        const Eta eta = draw_eta(c, 5, static_cast<std::uint64_t>(i));
        for (double s : {-200.0, -10.0, 0.0, 35.0, 300.0})
            EXPECT_NEAR(belief_cdf_S(s, x, eta, c), 1.0 - stated_demand_m(x.shifted(s), eta, c),
                        1e-10);
    }
}

TEST(StatedDemand, CesRejectsNonpositiveBetaWithoutSignedPower) {
    DgpConfig c;
    c.kind = DgpKind::ces_lognormal;
    c.beta = ParamDist::fixed(-0.5);
    EXPECT_THROW(c.check(), DgpError);
    c.signed_power = true;
    EXPECT_NO_THROW(c.check());
}

TEST(Simulate, CountsAndKeys) {
    DgpConfig c = degenerate_gaussian();
    c.respondents = 5;
    c.scenarios_per_respondent = 2;
    const Dataset d = simulate_survey(draw_population(c, 1), c, 2);
    EXPECT_EQ(d.size(), 10u);
    EXPECT_EQ(validate(d).duplicate_keys, 0u);
    EXPECT_EQ(validate(d).paired_count, 5u);
}

TEST(Simulate, RoundingToFivePercent) {
    DgpConfig c = degenerate_gaussian();
    c.respondents = 200;
    c.round_p = true;
    const Dataset d = simulate_survey(draw_population(c, 1), c, 2);
    for (const auto& r : d.records()) {
        const double k = r.p_stated * 20.0;
        EXPECT_NEAR(k, std::round(k), 1e-9);
    }
}

TEST(Oracle, DegenerateMedianStepAtZero) {
    const DgpConfig c = degenerate_gaussian();
    Scenario x;
    x.wage_pub = 500;
    x.wage_priv = 500;
    const auto fq = true_FQ(c, 0.5, {-10.0, -1e-9, 0.0, 10.0}, {{x, 1.0}}, 1);
    EXPECT_EQ(fq.values[0], 0.0);
    EXPECT_EQ(fq.values[1], 0.0);
    EXPECT_EQ(fq.values[2], 1.0);
    EXPECT_EQ(fq.values[3], 1.0);
}

TEST(Oracle, DegenerateUpperQuartileAtNormalQuantile) {
    const DgpConfig c = degenerate_gaussian();
    Scenario x;
    x.wage_pub = 500;
    x.wage_priv = 500;
    const double q = 100.0 * normal_quantile(0.75);
    EXPECT_NEAR(q, 67.44897501960817, 1e-9);
    EXPECT_NEAR(belief_quantile_S(0.75, x, Eta{}, c), q, 1e-6);
    const auto fq = true_FQ(c, 0.75, {q - 0.01, q + 0.01}, {{x, 1.0}}, 1);
    EXPECT_EQ(fq.values[0], 0.0);
    EXPECT_EQ(fq.values[1], 1.0);
}

TEST(Oracle, PolicyPointMassEqualsMedianCurve) {
    DgpConfig c = degenerate_gaussian();
    c.taste = {ParamDist::Kind::normal, 0.0, 80.0};
    Scenario x;
    const std::vector<double> grid{-200, -100, 0, 100, 200};
    const std::vector<double> taus{0.25, 0.5, 0.75};
    const auto obj = true_policy_objects(c, {{x, 1.0}}, taus, {0.0, 3.0, 0.0}, grid, 9);
    const auto fq = true_FQ(c, 0.5, grid, {{x, 1.0}}, 9);
    for (std::size_t j = 0; j < grid.size(); ++j) EXPECT_NEAR(obj.fs.values[j], fq.values[j], 1e-12);
}

TEST(Oracle, FsMatchesRealizedAtZero) {
    DgpConfig c = degenerate_gaussian();
    c.taste = {ParamDist::Kind::normal, 20.0, 80.0};
    c.alpha = {ParamDist::Kind::uniform, 0.3, 0.7};
    c.oracle_draws = 20000;
    Scenario x;
    std::vector<double> taus;
    for (int i = 1; i <= 99; ++i) taus.push_back(i / 100.0);
    const auto obj = true_policy_objects(c, {{x, 1.0}}, taus, std::vector<double>(taus.size(), 1.0),
                                         {-50.0, 0.0, 50.0}, 4);
    EXPECT_NEAR(obj.fs.values[1], obj.realized.values[1], 0.01);
}
