#include <gtest/gtest.h>

#include <cmath>

#include "exante/error.hpp"
#include "exante/policy.hpp"

using namespace exante;

namespace {

ReturnsCurve uniform_fs() {
    ReturnsCurve c;
    c.estimand = "FS";
    c.grid = uniform_grid(-1.0, 1.0, 0.1);
    for (double s : c.grid) c.values.push_back((s + 1.0) / 2.0);
    c.extrapolated.assign(c.grid.size(), false);
    return c;
}

std::vector<ReturnsCurve> logistic_fq(const std::vector<double>& taus) {
    std::vector<ReturnsCurve> out;
    for (double t : taus) {
        ReturnsCurve c;
        c.estimand = "FQ";
        c.parameter = t;
        c.grid = uniform_grid(-500, 500, 10);
        // Higher tau, larger quantile of S, so a cdf shifted right.
        for (double s : c.grid) c.values.push_back(1.0 / (1.0 + std::exp(-(s - 300.0 * (t - 0.5)) / 80.0)));
        c.extrapolated.assign(c.grid.size(), false);
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST(Weights, BetaOneOneIsFlat) {
    const auto w = make_weights(WeightKind::beta, 1, 1, default_tau_grid());
    for (double o : w.omega) EXPECT_NEAR(o, 1.0, 1e-12);
}

TEST(Weights, BetaTwoTwoSymmetricPeak) {
    const auto taus = default_tau_grid();
    const auto w = make_weights(WeightKind::beta, 2, 2, taus);
    const std::size_t n = taus.size();
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(w.omega[i], w.omega[n - 1 - i], 1e-12);
    EXPECT_EQ(std::max_element(w.omega.begin(), w.omega.end()) - w.omega.begin(), 9);
    EXPECT_LT(w.omega.front(), 1.0);
}

TEST(Weights, OptimismDownweightsUpperTail) {
    const auto w = make_weights(WeightKind::beta, 2, 5, default_tau_grid());
    EXPECT_LT(w.omega.back(), w.omega.front());
    double mean = 0.0;
    for (double o : w.omega) mean += o;
    EXPECT_NEAR(mean / w.omega.size(), 1.0, 1e-12);
}

TEST(Weights, Errors) {
    EXPECT_THROW(make_weights(WeightKind::beta, 0, 1, default_tau_grid()), PolicyError);
    EXPECT_THROW(make_weights(WeightKind::beta, 1, 1, {0.0, 0.5}), PolicyError);
}

TEST(PredictFs, UniformIsMeanAndPointMassSelects) {
    const auto taus = default_tau_grid();
    const auto fq = logistic_fq(taus);
    const auto fs = predict_fs(fq, make_weights(WeightKind::uniform, 1, 1, taus));
    for (std::size_t j = 0; j < fs.size(); ++j) {
        double sum = 0.0, lo = 1.0, hi = 0.0;
        for (const auto& c : fq) {
            sum += c.values[j];
            lo = std::min(lo, c.values[j]);
            hi = std::max(hi, c.values[j]);
        }
        EXPECT_NEAR(fs.values[j], sum / fq.size(), 1e-12);
        EXPECT_GE(fs.values[j], lo - 1e-15);
        EXPECT_LE(fs.values[j], hi + 1e-15);
    }
    const auto pm = predict_fs(fq, make_weights(WeightKind::point_mass, 0.5, 0, taus));
    for (std::size_t j = 0; j < pm.size(); ++j) EXPECT_NEAR(pm.values[j], fq[9].values[j], 1e-12);
}

TEST(PredictFs, LowerTauWeightsDominate) {
    const auto taus = default_tau_grid();
    const auto fq = logistic_fq(taus);
    const auto opt = predict_fs(fq, make_weights(WeightKind::beta, 2, 5, taus));
    const auto base = predict_fs(fq, make_weights(WeightKind::beta, 1, 1, taus));
    const auto pess = predict_fs(fq, make_weights(WeightKind::beta, 5, 2, taus));
    for (std::size_t j = 0; j < base.size(); ++j) {
        EXPECT_GE(opt.values[j], base.values[j] - 1e-12);
        EXPECT_GE(base.values[j], pess.values[j] - 1e-12);
    }
}

TEST(PredictFs, TauMismatchRejected) {
    const auto fq = logistic_fq({0.25, 0.5});
    EXPECT_THROW(predict_fs(fq, make_weights(WeightKind::uniform, 1, 1, {0.25, 0.75})), PolicyError);
}

TEST(Invert, UniformCdf) {
    const auto fs = uniform_fs();
    EXPECT_NEAR(invert_fs(fs, 0.6).value, 0.2, 1e-12);
    for (double s : {-0.73, 0.05, 0.41}) {
        const double back = invert_fs(fs, interpolate(fs, s)).value;
        EXPECT_LE(std::abs(back - s), 0.1 + 1e-12);
    }
    ReturnsCurve shifted = fs;
    for (auto& v : shifted.values) v = 0.1 + 0.8 * v;
    EXPECT_TRUE(invert_fs(shifted, 0.05).left_boundary);
    try {
        invert_fs(shifted, 0.95);
        FAIL() << "expected PolicyError";
    } catch (const PolicyError& e) {
        EXPECT_NE(std::string(e.what()).find("0.9"), std::string::npos);
    }
}

TEST(CostCurve, UniformCalibration) {
    const auto t = transfer_cost_curve(uniform_fs(), uniform_grid(0.0, 0.1, 0.01), 1.0);
    EXPECT_NEAR(t.f0, 0.5, 1e-12);
    EXPECT_NEAR(t.rows.front().transfer, 0.0, 1e-12);
    EXPECT_NEAR(t.rows.back().transfer, 0.2, 1e-9);
    EXPECT_NEAR(t.rows.back().transfer_cost, 0.12, 1e-9);
    for (std::size_t i = 1; i < t.rows.size(); ++i) {
        EXPECT_GE(t.rows[i].transfer, t.rows[i - 1].transfer);
        EXPECT_GE(t.rows[i].cost_multiplier, t.rows[i - 1].cost_multiplier);
    }
}

TEST(CostCurve, InfeasibleExpansion) {
    EXPECT_THROW(transfer_cost_curve(uniform_fs(), {0.0, 0.6}, 1.0), PolicyError);
}

TEST(Elasticity, ClosedFormAndDegenerate) {
    const auto t = transfer_cost_curve(uniform_fs(), {0.0, 0.01, 0.1}, 1.0);
    // bill ratio (0.51 / 0.5) (1 + T), T = 0.02 at x = 0.01
    const double closed = 100.0 * (0.51 / 0.5 * 1.02 - 1.0);
    EXPECT_NEAR(cost_elasticity(t), closed, 1e-6);

    ReturnsCurve step;
    step.estimand = "FS";
    step.grid = uniform_grid(-1.0, 1.0, 0.001);
    for (double s : step.grid) step.values.push_back(s <= 1e-9 ? 0.3 : 1.0);
    step.extrapolated.assign(step.grid.size(), false);
    const auto ts = transfer_cost_curve(step, {0.0, 0.01}, 1.0);
    EXPECT_NEAR(cost_elasticity(ts, ElasticityConvention::proportional), 1.0, 1e-2);
    EXPECT_THROW(cost_elasticity(transfer_cost_curve(uniform_fs(), {0.0, 0.1}, 1.0)), PolicyError);
}

#include "exante/acceptance.hpp"

TEST(Acceptance, SmokeCoverageCutoff) {
    EXPECT_DOUBLE_EQ(smoke_coverage_rate(10), 0.6);
    EXPECT_LE(smoke_coverage_rate(50), 0.8);
    EXPECT_THROW(smoke_coverage_rate(0), ConfigError);
}
