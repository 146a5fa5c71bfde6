#pragma once

#include <algorithm>
#include <stdexcept>

#include "exante/parallel.hpp"

namespace exante {

template <class Summary>
ReturnsCurve brute_force_cdf(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                             const std::vector<double>& grid, std::uint64_t seed,
                             Summary&& g) {
    if (x_tilde.empty()) throw std::invalid_argument("brute_force_cdf: empty scenario mix");
    double total_mass = 0.0;
    for (const auto& w : x_tilde) total_mass += w.mass;
    const std::size_t m = cfg.oracle_draws;
    ReturnsCurve out;
    out.grid = grid;
    out.values.assign(grid.size(), 0.0);
    std::vector<double> summary(m);
    for (const auto& w : x_tilde) {
        parallel_for(m, [&](std::size_t i) { summary[i] = g(draw_eta(cfg, seed, i), w.x, i); });
        std::sort(summary.begin(), summary.end());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto below = std::upper_bound(summary.begin(), summary.end(), grid[j]);
            out.values[j] += w.mass / total_mass *
                             static_cast<double>(below - summary.begin()) / static_cast<double>(m);
        }
    }
    for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
    return out;
}

}  // namespace exante
