#pragma once

#include <vector>

#include "exante/curve.hpp"

namespace exante {

struct BandSpec {
    double level = 0.9;
    BandKind kind = BandKind::pointwise;

    /// Throws InferenceError unless level lies in (0.5, 1).
    void check() const;
};

/// Robust scale per grid point: interquartile range of the draws / 1.349.
std::vector<double> robust_scale(const std::vector<ReturnsCurve>& draws);

/// point +- z_{(1+level)/2} sigma, clipped to [0,1]. Needs >= 50 draws on the
/// point's grid.
ReturnsCurve pointwise_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                            const BandSpec& spec);

/// point +- k sigma where k is the level-quantile across draws of
/// max_{s in region, sigma(s) > 0} |draw(s) - point(s)| / sigma(s). The same
/// cross-draw sigma is used for every draw. `region` empty means every point
/// not flagged as extrapolated.
ReturnsCurve uniform_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                          const BandSpec& spec, const std::vector<bool>& region = {});

/// Dispatches on spec.kind.
ReturnsCurve add_band(const ReturnsCurve& point, const std::vector<ReturnsCurve>& draws,
                      const BandSpec& spec, const std::vector<bool>& region = {});

/// True iff lower <= truth <= upper at every grid point where `region` holds.
bool band_covers(const ReturnsCurve& banded, const ReturnsCurve& truth,
                 const std::vector<bool>& region = {});

}  // namespace exante
