#include <gtest/gtest.h>

#include <cmath>

#include "exante/dgp.hpp"
#include "exante/dr.hpp"
#include "exante/error.hpp"
#include "exante/numerics.hpp"

using namespace exante;

namespace {

Dataset small_dataset(std::size_t n, std::uint64_t seed, bool round = false) {
    DgpConfig c;
    c.taste = {ParamDist::Kind::logistic, 0.0, 60.0};
    c.gamma[Attribute::layoff_pub] = -300.0;
    c.respondents = n;
    c.round_p = round;
    return simulate_survey(draw_population(c, seed), c, mix_seed(seed, 1));
}

DRModel intercept_model(const std::vector<double>& p, const std::vector<double>& values) {
    Eigen::MatrixXd coef(static_cast<Eigen::Index>(p.size()), 1);
    for (std::size_t k = 0; k < p.size(); ++k) coef(static_cast<Eigen::Index>(k), 0) = logit(values[k]);
    return DRModel(DesignMap::intercept_only(), ThresholdGrid{p},
                   coef, std::vector<ThresholdDiagnostics>(p.size()), true);
}

}  // namespace

TEST(Design, DefaultMapHasTwelveFeatures) {
    const DesignMap m = DesignMap::default_map();
    EXPECT_EQ(m.size(), 12u);
    Scenario x;
    x.wage_pub = 750;
    x.wage_priv = 750;
    const Eigen::VectorXd r = m.row(x);
    EXPECT_EQ(r.size(), 12);
    EXPECT_TRUE(r.isApprox(m.row(x)));
    EXPECT_DOUBLE_EQ(r(0), 1.0);
    EXPECT_DOUBLE_EQ(r(3), 7.5 * 7.5);
}

TEST(Design, UnknownTokenRejected) {
    EXPECT_THROW(DesignMap({"intercept", "salary"}), Error);
}

TEST(Thresholds, UniformIncludesOne) {
    const ThresholdGrid g = ThresholdGrid::uniform(4);
    ASSERT_EQ(g.p.size(), 4u);
    EXPECT_DOUBLE_EQ(g.p.back(), 1.0);
    EXPECT_DOUBLE_EQ(g.p.front(), 0.25);
}

TEST(Fit, TopThresholdIsClampedToOne) {
    const Dataset d = small_dataset(200, 1);
    const DRModel m = fit_dr(d, ThresholdGrid::uniform(10), DesignMap::default_map());
    for (const auto& r : d.records()) EXPECT_GE(m.raw_values(r.scenario).back(), 1.0 - 1e-6);
}

TEST(Fit, WeightScaleInvariance) {
    const Dataset d = small_dataset(300, 2);
    const ThresholdGrid g = ThresholdGrid::uniform(5);
    const DRModel a = fit_dr(d, g, DesignMap::default_map());
    const DRModel b = fit_dr(d, g, DesignMap::default_map(), std::vector<double>(d.size(), 2.0));
    EXPECT_LT((a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Fit, InterceptOnlyEqualsEmpiricalCdf) {
    const Dataset d = small_dataset(500, 3, true);
    const ThresholdGrid g = ThresholdGrid::uniform(20);
    FitOptions opt;
    opt.tolerance = 1e-12;
    const DRModel m = fit_dr(d, g, DesignMap::intercept_only(), {}, opt);
    const Scenario x = d.records().front().scenario;
    for (double p : g.p) {
        double share = 0.0;
        for (const auto& r : d.records()) share += r.p_stated <= p ? 1.0 : 0.0;
        share /= static_cast<double>(d.size());
        share = std::clamp(share, kProbClamp, 1.0 - kProbClamp);
        EXPECT_NEAR(m.cdf_at(p, x), p >= 1.0 ? 1.0 : share, 1e-6) << "p=" << p;
    }
}

TEST(Rearrange, SortsValues) {
    const auto v = rearrange_values({0.3, 0.2, 0.5});
    EXPECT_EQ(v, (std::vector<double>{0.2, 0.3, 0.5}));
    const std::vector<double> mono{0.1, 0.4, 0.4, 0.9};
    EXPECT_EQ(rearrange_values(mono), mono);
}

TEST(Evaluate, CdfConventions) {
    const DRModel m = intercept_model({0.2, 0.5, 0.8, 1.0}, {0.1, 0.6, 0.9, 0.99});
    const Scenario x;
    EXPECT_EQ(m.cdf_at(1.0, x), 1.0);
    EXPECT_EQ(m.cdf_at(0.0, x), 0.0);
    EXPECT_EQ(m.cdf_at(-0.5, x), 0.0);
    EXPECT_EQ(m.cdf_at(0.1, x), 0.0);
    EXPECT_NEAR(m.cdf_at(0.6, x), 0.6, 1e-12);
}

TEST(Evaluate, QuantileStepInversion) {
    const DRModel m = intercept_model({0.2, 0.5, 0.8, 1.0}, {0.1, 0.6, 0.9, 0.99});
    const Scenario x;
    EXPECT_EQ(m.quantile_at(0.5, x), 0.5);
    EXPECT_EQ(m.quantile_at(0.95, x), 1.0);
    EXPECT_EQ(m.quantile_at(0.05, x), 0.2);
}

TEST(Bootstrap, ZeroReplicatesIsEmpty) {
    const Dataset d = small_dataset(100, 4);
    EXPECT_TRUE(bootstrap_fits(d, ThresholdGrid::uniform(5), DesignMap::default_map(), 0, 1).fits.empty());
}

TEST(Bootstrap, UnitWeightsReproduceMainFit) {
    const Dataset d = small_dataset(200, 5);
    const ThresholdGrid g = ThresholdGrid::uniform(5);
    const DRModel main = fit_dr(d, g, DesignMap::default_map());
    BootstrapOptions opt;
    opt.unit_weights = true;
    const auto res = bootstrap_fits(d, g, DesignMap::default_map(), 2, 9, opt);
    ASSERT_EQ(res.fits.size(), 2u);
    for (const auto& f : res.fits)
        EXPECT_LT((f.coefficients() - main.coefficients()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Bootstrap, WeightsSharedWithinRespondentAndSeeded) {
    const Dataset d = small_dataset(50, 6);
    const auto w = bootstrap_weights(d, 3, 0);
    EXPECT_EQ(w, bootstrap_weights(d, 3, 0));
    EXPECT_NE(w, bootstrap_weights(d, 3, 1));
    for (std::size_t i = 1; i < d.size(); ++i)
        if (d.respondent_index()[i] == d.respondent_index()[i - 1]) EXPECT_EQ(w[i], w[i - 1]);
}

TEST(Serialize, ModelJsonRoundTrip) {
    const Dataset d = small_dataset(150, 7);
    const DRModel m = fit_dr(d, ThresholdGrid::uniform(5), DesignMap::default_map());
    const DRModel back = model_from_json(model_to_json(m));
    EXPECT_EQ(back.design(), m.design());
    EXPECT_EQ(back.grid().p, m.grid().p);
    EXPECT_EQ(back.coefficients(), m.coefficients());
}
