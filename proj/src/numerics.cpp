#include "exante/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace exante {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (p <= 0.0) return -INFINITY;
    if (p >= 1.0) return INFINITY;
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

namespace {

GaussHermiteRule build_gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
    // Jacobi matrix of the probabilists' Hermite polynomials: zero diagonal,
    // off-diagonal sqrt(k).
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd sub(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(i);
        const double v = solver.eigenvectors()(0, i);
        rule.weights[i] = v * v;
    }
    // Symmetrise: the rule is exactly symmetric about zero.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (auto& w : rule.weights) w /= total;
    return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(build_gauss_hermite(n));
    return *slot;
}

std::vector<double> isotonic_increasing(std::span<const double> values,
                                        std::span<const double> weights) {
    const std::size_t n = values.size();
    if (std::is_sorted(values.begin(), values.end())) {
        return {values.begin(), values.end()};
    }
    struct Block {
        double sum;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        blocks.push_back({values[i] * w, w, 1});
        while (blocks.size() > 1) {
            const Block& b = blocks.back();
            const Block& a = blocks[blocks.size() - 2];
            if (a.sum / a.weight <= b.sum / b.weight) break;
            Block merged{a.sum + b.sum, a.weight + b.weight, a.count + b.count};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (const auto& b : blocks) out.insert(out.end(), b.count, b.sum / b.weight);
    return out;
}

double inverse_ecdf(std::vector<double> sample, double level) {
    if (sample.empty()) throw std::invalid_argument("inverse_ecdf: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    auto idx = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
    idx = std::clamp<std::size_t>(idx, 1, sample.size());
    return sample[idx - 1];
}

double sample_quantile(std::vector<double> sample, double level) {
    if (sample.empty()) throw std::invalid_argument("sample_quantile: empty sample");
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * level;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman_rho(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("spearman_rho: need two equally sized samples");
    const auto ra = average_ranks(a);
    const auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0 || sbb == 0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform_open(Rng& rng) {
    // 53 random bits, shifted off zero.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace exante
