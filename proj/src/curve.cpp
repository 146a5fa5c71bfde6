#include "exante/curve.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "exante/numerics.hpp"

namespace exante {

std::string to_string(BandKind k) { return k == BandKind::uniform ? "uniform" : "pointwise"; }

void ReturnsCurve::check() const {
    if (values.size() != grid.size())
        throw std::invalid_argument("curve '" + estimand + "': grid/value size mismatch");
    if (!extrapolated.empty() && extrapolated.size() != grid.size())
        throw std::invalid_argument("curve '" + estimand + "': mask size mismatch");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("curve '" + estimand + "': grid not increasing");
    for (double v : values)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("curve '" + estimand + "': value outside [0,1]");
    if (band) {
        if (band->lower.size() != grid.size() || band->upper.size() != grid.size())
            throw std::invalid_argument("curve '" + estimand + "': band size mismatch");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (band->lower[i] > values[i] + 1e-12 || band->upper[i] < values[i] - 1e-12)
                throw std::invalid_argument("curve '" + estimand +
                                            "': band does not contain the point");
    }
}

double ReturnsCurve::at(double g) const {
    const auto it = std::upper_bound(grid.begin(), grid.end(), g);
    if (it == grid.begin()) return 0.0;
    return values[static_cast<std::size_t>(it - grid.begin()) - 1];
}

void make_monotone(ReturnsCurve& c) {
    for (double& v : c.values) v = std::clamp(v, 0.0, 1.0);
    c.values = isotonic_increasing(c.values);
}

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

double parse_num(const std::string& s) {
    if (s.empty()) return NAN;
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc()) throw std::invalid_argument("curve csv: bad number '" + s + "'");
    return v;
}

}  // namespace

std::string curves_to_csv(const std::vector<ReturnsCurve>& curves,
                          const std::vector<std::string>& header) {
    std::ostringstream out;
    for (const auto& h : header) out << "# " << h << '\n';
    for (const auto& c : curves) {
        if (c.band)
            out << "# band estimand=" << c.estimand << " tau=" << num(c.parameter)
                << " kind=" << to_string(c.band->kind) << " level=" << num(c.band->level)
                << " critical=" << num(c.band->critical)
                << (c.band->degenerate ? " degenerate=1" : "") << '\n';
    }
    out << "estimand,tau_or_level,grid_value,point,lower,upper,extrapolated\n";
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            out << c.estimand << ',' << num(c.parameter) << ',' << num(c.grid[i]) << ','
                << num(c.values[i]) << ',';
            if (c.band) out << num(c.band->lower[i]) << ',' << num(c.band->upper[i]);
            else out << ',';
            out << ',' << (!c.extrapolated.empty() && c.extrapolated[i] ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

std::vector<ReturnsCurve> curves_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<ReturnsCurve> out;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        if (cells.size() != 7) throw std::invalid_argument("curve csv: expected 7 columns");
        const double tau = parse_num(cells[1]);
        if (out.empty() || out.back().estimand != cells[0] || out.back().parameter != tau) {
            ReturnsCurve c;
            c.estimand = cells[0];
            c.parameter = tau;
            out.push_back(std::move(c));
        }
        ReturnsCurve& c = out.back();
        c.grid.push_back(parse_num(cells[2]));
        c.values.push_back(parse_num(cells[3]));
        c.extrapolated.push_back(cells[6] == "1");
        if (!cells[4].empty()) {
            if (!c.band) c.band.emplace();
            c.band->lower.push_back(parse_num(cells[4]));
            c.band->upper.push_back(parse_num(cells[5]));
        }
    }
    return out;
}

double sup_distance(const ReturnsCurve& a, const ReturnsCurve& b, const std::vector<bool>& use) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: grid size mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!use.empty() && !use[i]) continue;
        d = std::max(d, std::abs(a.values[i] - b.values[i]));
    }
    return d;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
    if (!(step > 0) || !(hi >= lo)) throw std::invalid_argument("uniform_grid: bad range");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + static_cast<double>(i) * step;
    return g;
}

}  // namespace exante
