#pragma once

#include <optional>
#include <string>
#include <vector>

namespace exante {

enum class BandKind { pointwise, uniform };

std::string to_string(BandKind k);

struct Band {
    std::vector<double> lower;
    std::vector<double> upper;
    double level = 0.9;
    BandKind kind = BandKind::pointwise;
    /// Critical value: z quantile for pointwise bands, k-hat for uniform ones.
    double critical = 0.0;
    bool degenerate = false;
};

/// A cdf-like function tabulated on an increasing grid.
struct ReturnsCurve {
    std::string estimand;  // "FQ", "mu", "iqr", "qwtp", "mwtp", "FS", ...
    double parameter = 0.0;  // tau, or 0 when not applicable
    std::string label;
    std::vector<double> grid;
    std::vector<double> values;
    /// True where the grid point lies outside the identified region.
    std::vector<bool> extrapolated;
    std::optional<Band> band;
    /// Warnings raised while building the curve (e.g. masked scenarios).
    std::vector<std::string> notes;

    std::size_t size() const { return grid.size(); }

    /// Throws std::invalid_argument on size mismatch, non-increasing grid,
    /// values outside [0,1] or a band not containing the point.
    void check() const;

    /// Right-continuous step evaluation: value at the largest grid point <= g;
    /// 0 below the grid.
    double at(double g) const;
};

/// Clamps to [0,1] and applies the weighted isotonic projection in the grid.
void make_monotone(ReturnsCurve& c);

/// Curves as CSV rows: estimand, tau_or_level, grid_value, point, lower,
/// upper, extrapolated. `header` lines are written first, prefixed by '#'.
std::string curves_to_csv(const std::vector<ReturnsCurve>& curves,
                          const std::vector<std::string>& header = {});

/// Inverse of curves_to_csv (band level/kind are not recovered; lower/upper are).
std::vector<ReturnsCurve> curves_from_csv(const std::string& text);

/// Sup-norm distance over grid points where `use` is true (all if empty).
double sup_distance(const ReturnsCurve& a, const ReturnsCurve& b,
                    const std::vector<bool>& use = {});

/// Uniform grid lo, lo+step, ..., hi (hi included when it lies on the lattice).
std::vector<double> uniform_grid(double lo, double hi, double step);

}  // namespace exante
