#include "exante/inference.hpp"

#include <algorithm>
#include <cmath>

#include "exante/error.hpp"
#include "exante/numerics.hpp"

namespace exante {

void BandSpec::check() const {
    if (!(level > 0.5 && level < 1.0)) throw InferenceError("band level must lie in (0.5, 1)");
}

namespace {

void check_draws(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws) {
    if (draws.size() < 50)
        throw InferenceError("need at least 50 bootstrap draws (have " +
                             std::to_string(draws.size()) + ")");
    for (const auto& d : draws) {
        if (d.grid.size() != point.grid.size())
            throw InferenceError("draw grid does not match the point estimate");
        for (std::size_t j = 0; j < d.grid.size(); ++j)
            if (std::abs(d.grid[j] - point.grid[j]) > 1e-9 * (1.0 + std::abs(point.grid[j])))
                throw InferenceError("draw grid does not match the point estimate");
    }
}

ReturnsCurve with_band(const ReturnsCurve& point, const std::vector<double>& sigma, double critical,
                       const BandSpec& spec) {
    ReturnsCurve out = point;
    Band b;
    b.level = spec.level;
    b.kind = spec.kind;
    b.critical = critical;
    b.lower.resize(point.size());
    b.upper.resize(point.size());
    for (std::size_t j = 0; j < point.size(); ++j) {
        b.lower[j] = std::clamp(point.values[j] - critical * sigma[j], 0.0, point.values[j]);
        b.upper[j] = std::clamp(point.values[j] + critical * sigma[j], point.values[j], 1.0);
    }
    out.band = std::move(b);
    return out;
}

}  // namespace

std::vector<double> robust_scale(const std::vector<ReturnsCurve>& draws) {
    if (draws.empty()) return {};
    const std::size_t n = draws.front().size();
    std::vector<double> sigma(n);
    std::vector<double> column(draws.size());
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t b = 0; b < draws.size(); ++b) column[b] = draws[b].values[j];
        sigma[j] = (sample_quantile(column, 0.75) - sample_quantile(column, 0.25)) / 1.349;
    }
    return sigma;
}

ReturnsCurve pointwise_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                            const BandSpec& spec) {
    spec.check();
    check_draws(point, draws);
    const double z = normal_quantile(0.5 * (1.0 + spec.level));
    BandSpec s = spec;
    s.kind = BandKind::pointwise;
    return with_band(point, robust_scale(draws), z, s);
}

ReturnsCurve uniform_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                          const BandSpec& spec, const std::vector<bool>& region) {
    spec.check();
    check_draws(point, draws);
    if (!region.empty() && region.size() != point.size())
        throw InferenceError("region mask does not match the grid");
    const std::vector<double> sigma = robust_scale(draws);
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < point.size(); ++j) {
        const bool in_region = region.empty()
                                   ? (point.extrapolated.empty() || !point.extrapolated[j])
                                   : region[j];
        if (in_region && sigma[j] > 0.0) active.push_back(j);
    }
    BandSpec s = spec;
    s.kind = BandKind::uniform;
    if (active.empty()) {
        ReturnsCurve out = with_band(point, sigma, 0.0, s);
        out.band->degenerate = true;
        out.notes.push_back("uniform band degenerate: robust scale is zero on the whole region");
        return out;
    }
    std::vector<double> sup_t(draws.size(), 0.0);
    for (std::size_t b = 0; b < draws.size(); ++b)
        for (std::size_t j : active)
            sup_t[b] = std::max(sup_t[b], std::abs(draws[b].values[j] - point.values[j]) / sigma[j]);
    const double k = inverse_ecdf(sup_t, spec.level);
    return with_band(point, sigma, k, s);
}

ReturnsCurve add_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                      const BandSpec& spec, const std::vector<bool>& region) {
    return spec.kind == BandKind::uniform ? uniform_band(point, draws, spec, region)
                                          : pointwise_band(point, draws, spec);
}

bool band_covers(const ReturnsCurve& banded, const ReturnsCurve& truth,
                 const std::vector<bool>& region) {
    if (!banded.band) throw InferenceError("curve has no band");
    if (truth.size() != banded.size()) throw InferenceError("truth grid does not match");
    for (std::size_t j = 0; j < banded.size(); ++j) {
        if (!region.empty() && !region[j]) continue;
        if (truth.values[j] < banded.band->lower[j] || truth.values[j] > banded.band->upper[j])
            return false;
    }
    return true;
}

}  // namespace exante
