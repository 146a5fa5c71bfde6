#include <gtest/gtest.h>

#include "exante/dgp.hpp"
#include "exante/dr.hpp"
#include "exante/error.hpp"
#include "exante/numerics.hpp"
#include "exante/returns.hpp"

using namespace exante;

namespace {

struct Fixture {
    DgpConfig cfg;
    Dataset data;
    DRModel model;
    ScenarioMix x_tilde;
    SGrid grid;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        DgpConfig c;
        c.taste = {ParamDist::Kind::logistic, 0.0, 60.0};
        c.gamma[Attribute::layoff_pub] = -300.0;
        c.respondents = 800;
        Dataset d = simulate_survey(draw_population(c, 21), c, 22);
        DRModel m = fit_dr(d, ThresholdGrid::uniform(40), DesignMap::default_map());
        Scenario x;
        x.wage_pub = 650;
        x.wage_priv = 650;
        x.layoff_priv = 0.20;
        SGrid g = SGrid::uniform(c.support, -350, 350, 5);
        return Fixture{c, d, m, {{x, 1.0}}, g};
    }();
    return f;
}

}  // namespace

TEST(SGrid, ChecksAndFlags) {
    SupportSpec s;
    s.wage_priv = {300, 1000, 50};
    SGrid g{{-10, 5, 20}, s};
    EXPECT_THROW(g.check(), ReturnsError);
    g.s = {-400, 0, 400};
    Scenario x;
    x.wage_priv = 650;
    x.layoff_priv = 0.20;
    EXPECT_EQ(g.extrapolated(x), (std::vector<bool>{true, false, true}));
    const auto w = SGrid::uniform(s, -10, 10, 5).weights();
    EXPECT_DOUBLE_EQ(w.front(), 2.5);
    EXPECT_DOUBLE_EQ(w[1], 5.0);
}

TEST(FQ, EmptyMixRejected) {
    const auto& f = fixture();
    EXPECT_THROW(fq_curve(f.model, 0.5, f.grid, {}), Error);
}

TEST(FQ, TinyTauIsIdenticallyOne) {
    const auto& f = fixture();
    const auto c = fq_curve(f.model, 1e-9, f.grid, f.x_tilde);
    for (double v : c.values) EXPECT_EQ(v, 1.0);
}

TEST(FQ, MonotoneAndBounded) {
    const auto& f = fixture();
    for (double tau : {0.25, 0.5, 0.75}) {
        const auto c = fq_curve(f.model, tau, f.grid, f.x_tilde);
        EXPECT_NO_THROW(c.check());
        for (std::size_t j = 1; j < c.size(); ++j) EXPECT_LE(c.values[j - 1], c.values[j]);
    }
}

TEST(AIntegrals, IqrIsDifferenceOfTauIntegrals) {
    const auto& f = fixture();
    const ProfileTable t(f.model, f.x_tilde[0].x, f.grid);
    for (double a : midpoint_grid(10)) {
        const double d = a_tau(t, f.grid, a, 0.75).value - a_tau(t, f.grid, a, 0.25).value;
        EXPECT_NEAR(a_iqr(t, f.grid, a, 0.25, 0.75).value, d, 1e-9);
        EXPECT_EQ(a_iqr(t, f.grid, a, 0.5 - 1e-13, 0.5).value, 0.0);
    }
}

TEST(Distributions, IqrNonnegativeAndMuTotalMass) {
    const auto& f = fixture();
    const auto iqr = dist_iqr(f.model, f.x_tilde, 0.25, 0.75, {-50, -1, 0, 100, 2000}, f.grid, 50);
    EXPECT_EQ(iqr.values[0], 0.0);
    EXPECT_EQ(iqr.values[1], 0.0);
    EXPECT_EQ(iqr.values.back(), 1.0);
    const auto mu = dist_mu(f.model, f.x_tilde, {-5000, 0, 5000}, f.grid, 50);
    EXPECT_EQ(mu.values.front(), 0.0);
    EXPECT_EQ(mu.values.back(), 1.0);
}

TEST(PseudoRanks, SingleScenarioGateError) {
    std::vector<ChoiceRecord> rs;
    for (int i = 0; i < 5; ++i) {
        ChoiceRecord r;
        r.respondent_id = std::to_string(i);
        rs.push_back(r);
    }
    const Dataset d(rs, SupportSpec{});
    try {
        pseudo_ranks(fixture().model, d);
        FAIL() << "expected ReturnsError";
    } catch (const ReturnsError& e) {
        EXPECT_NE(std::string(e.what()).find("two elicited scenarios"), std::string::npos);
    }
}

TEST(PseudoRanks, OnePairPerRespondent) {
    const auto& f = fixture();
    const auto pr = pseudo_ranks(f.model, f.data);
    EXPECT_EQ(pr.pairs.size(), f.data.respondent_count());
    for (const auto& p : pr.pairs) {
        EXPECT_GE(p.v1, 0.0);
        EXPECT_LE(p.v1, 1.0);
    }
}

TEST(Copula, IndependenceMasses) {
    const auto c = fit_copula({}, CopulaKind::independence, 8);
    ASSERT_EQ(c.masses.size(), 64u);
    for (double m : c.masses) EXPECT_DOUBLE_EQ(m, 1.0 / 64.0);
}

TEST(Copula, ComonotonePairsConcentrateOnDiagonal) {
    RankPairs pairs;
    for (int i = 0; i < 200; ++i) {
        const double v = (i + 0.5) / 200.0;
        pairs.pairs.push_back({std::to_string(i), v, v, {}, {}});
    }
    const auto c = fit_copula(pairs, CopulaKind::checkerboard, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            if (i != j) EXPECT_LE(c.mass(i, j), 1e-6);
    EXPECT_GT(c.spearman(), 0.95);
}

TEST(Copula, TooFewPairsSuggestsIndependence) {
    RankPairs pairs;
    pairs.pairs.push_back({"a", 0.2, 0.3, {}, {}});
    try {
        fit_copula(pairs, CopulaKind::checkerboard);
        FAIL() << "expected ReturnsError";
    } catch (const ReturnsError& e) {
        EXPECT_NE(std::string(e.what()).find("independence"), std::string::npos);
    }
}

TEST(Wtp, ZeroShiftComonotoneIsStepAtZero) {
    const auto& f = fixture();
    const auto c = fit_copula({}, CopulaKind::comonotone);
    const std::vector<double> y{-20, -1e-9, 0, 1e-9, 20};
    const auto q = dist_qwtp(f.model, c, f.x_tilde, {Attribute::layoff_pub, 0.0}, 0.5, y, f.grid);
    EXPECT_EQ(q.values, (std::vector<double>{0, 0, 1, 1, 1}));
    const auto m = dist_mwtp(f.model, c, f.x_tilde, {Attribute::layoff_pub, 0.0}, y, f.grid);
    EXPECT_EQ(m.values, (std::vector<double>{0, 0, 1, 1, 1}));
}

TEST(Wtp, ZeroShiftIndependenceIsNotDegenerate) {
    const auto& f = fixture();
    const auto c = fit_copula({}, CopulaKind::independence);
    const std::vector<double> y{-1e-9, 0};
    const auto q = dist_qwtp(f.model, c, f.x_tilde, {Attribute::layoff_pub, 0.0}, 0.5, y, f.grid);
    EXPECT_LT(q.values[1] - q.values[0], 1.0);
}

TEST(Wtp, ShiftOutsideSupportIsMasked) {
    const auto& f = fixture();
    const auto c = fit_copula({}, CopulaKind::comonotone);
    ScenarioMix mix = f.x_tilde;
    mix.push_back({f.x_tilde[0].x, 1.0});
    mix[1].x.layoff_pub = 0.10;
    const auto q = dist_qwtp(f.model, c, mix, {Attribute::layoff_pub, 0.05}, 0.5, {0.0}, f.grid);
    EXPECT_FALSE(q.notes.empty());
}
