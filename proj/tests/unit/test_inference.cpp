#include <gtest/gtest.h>

#include <random>

#include "exante/error.hpp"
#include "exante/inference.hpp"
#include "exante/numerics.hpp"

using namespace exante;

namespace {

ReturnsCurve flat(std::size_t n, double v) {
    ReturnsCurve c;
    c.estimand = "FQ";
    for (std::size_t j = 0; j < n; ++j) {
        c.grid.push_back(static_cast<double>(j));
        c.values.push_back(v);
    }
    c.extrapolated.assign(n, false);
    return c;
}

std::vector<ReturnsCurve> normal_draws(std::size_t n, int b, double sd, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0);
    std::normal_distribution<double> z(0.5, sd);
    std::vector<ReturnsCurve> out;
    for (int i = 0; i < b; ++i) {
        ReturnsCurve c = flat(n, 0.0);
        for (auto& v : c.values) v = z(rng);
        out.push_back(c);
    }
    return out;
}

}  // namespace

TEST(Band, IdenticalDrawsGiveZeroWidth) {
    const ReturnsCurve p = flat(5, 0.4);
    const std::vector<ReturnsCurve> draws(60, p);
    const auto pw = pointwise_band(p, draws, {0.9, BandKind::pointwise});
    ASSERT_TRUE(pw.band);
    EXPECT_EQ(pw.band->lower, p.values);
    EXPECT_EQ(pw.band->upper, p.values);
    const auto un = uniform_band(p, draws, {0.9, BandKind::uniform});
    EXPECT_TRUE(un.band->degenerate);
    EXPECT_EQ(un.band->upper, p.values);
}

TEST(Band, RobustScaleRecoversNormalSd) {
    const auto draws = normal_draws(1, 4000, 0.1, 3);
    EXPECT_NEAR(robust_scale(draws)[0], 0.1, 0.015);
}

TEST(Band, SingletonRegionUniformEqualsPointwiseCritical) {
    const ReturnsCurve p = flat(3, 0.5);
    const auto draws = normal_draws(3, 2000, 0.05, 4);
    const auto un = uniform_band(p, draws, {0.9, BandKind::uniform}, {false, true, false});
    const auto pw = pointwise_band(p, draws, {0.9, BandKind::pointwise});
    // |t| quantile at one point approximates the two-sided normal critical value.
    EXPECT_NEAR(un.band->critical, pw.band->critical, 0.1);
    EXPECT_NEAR(un.band->upper[1] - 0.5, un.band->critical * robust_scale(draws)[1], 1e-12);
}

TEST(Band, UniformWiderThanPointwise) {
    const ReturnsCurve p = flat(30, 0.5);
    const auto draws = normal_draws(30, 500, 0.05, 5);
    const auto un = uniform_band(p, draws, {0.9, BandKind::uniform});
    const auto pw = pointwise_band(p, draws, {0.9, BandKind::pointwise});
    EXPECT_GT(un.band->critical, pw.band->critical);
    EXPECT_TRUE(band_covers(un, p));
}

TEST(Band, Errors) {
    const ReturnsCurve p = flat(5, 0.4);
    EXPECT_THROW(pointwise_band(p, std::vector<ReturnsCurve>(10, p), {0.9, BandKind::pointwise}),
                 InferenceError);
    EXPECT_THROW(pointwise_band(p, std::vector<ReturnsCurve>(60, flat(4, 0.4)),
                                {0.9, BandKind::pointwise}),
                 InferenceError);
    EXPECT_THROW((BandSpec{1.2, BandKind::uniform}.check()), InferenceError);
}

TEST(Band, CoverageCheckRespectsRegion) {
    ReturnsCurve p = flat(3, 0.5);
    p.band = Band{{0.4, 0.4, 0.4}, {0.6, 0.6, 0.6}, 0.9, BandKind::uniform, 1.0, false};
    ReturnsCurve t = flat(3, 0.5);
    t.values[2] = 0.9;
    EXPECT_FALSE(band_covers(p, t));
    EXPECT_TRUE(band_covers(p, t, {true, true, false}));
}
