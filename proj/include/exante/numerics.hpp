#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace exante {

double normal_cdf(double x);
double normal_quantile(double p);
double logistic(double x);
double logit(double p);

/// Probabilists' Gauss–Hermite rule: sum_i w_i f(x_i) ~ E[f(Z)], Z ~ N(0,1).
/// Weights sum to one.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Golub–Welsch rule with n nodes. Rules are cached per n (thread-safe).
const GaussHermiteRule& gauss_hermite(int n);

/// Weighted least-squares projection onto nondecreasing sequences
/// (pool-adjacent-violators). Already monotone input is returned unchanged.
std::vector<double> isotonic_increasing(std::span<const double> values,
                                        std::span<const double> weights = {});

/// Inverse empirical cdf: smallest order statistic x_(i) with i/n >= level.
double inverse_ecdf(std::vector<double> sample, double level);

/// Linearly interpolated sample quantile (Hyndman–Fan type 7).
double sample_quantile(std::vector<double> sample, double level);

/// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> a, std::span<const double> b);

/// SplitMix64 finaliser; used to derive independent stream seeds from a
/// (seed, stream id) pair.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix_seed(seed, stream));
}

/// Uniform on the open interval (0,1).
double uniform_open(Rng& rng);

}  // namespace exante
