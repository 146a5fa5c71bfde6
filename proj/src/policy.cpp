#include "exante/policy.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <charconv>
#include <cmath>
#include <sstream>

#include "exante/error.hpp"

namespace exante {

std::string to_string(WeightKind k) {
    switch (k) {
        case WeightKind::uniform: return "uniform";
        case WeightKind::beta: return "beta";
        case WeightKind::point_mass: return "point_mass";
    }
    return "?";
}

WeightKind parse_weight_kind(const std::string& s) {
    if (s == "uniform") return WeightKind::uniform;
    if (s == "beta") return WeightKind::beta;
    if (s == "point_mass") return WeightKind::point_mass;
    throw PolicyError("unknown weight kind '" + s + "'");
}

std::vector<double> default_tau_grid() {
    std::vector<double> t;
    for (int i = 1; i <= 19; ++i) t.push_back(i / 20.0);
    return t;
}

WeightScheme make_weights(WeightKind kind, double a, double b, const std::vector<double>& tau_grid,
                          const std::string& name) {
    if (tau_grid.empty()) throw PolicyError("tau grid is empty");
    for (double t : tau_grid)
        if (!(t > 0.0 && t < 1.0)) throw PolicyError("tau grid must lie in (0,1)");
    WeightScheme w;
    w.kind = kind;
    w.a = a;
    w.b = b;
    w.tau = tau_grid;
    w.name = name.empty() ? to_string(kind) : name;
    const std::size_t n = tau_grid.size();
    switch (kind) {
        case WeightKind::uniform:
            w.omega.assign(n, 1.0);
            break;
        case WeightKind::beta: {
            if (!(a > 0 && b > 0)) throw PolicyError("beta parameters must be positive");
            const boost::math::beta_distribution<double> dist(a, b);
            w.omega.resize(n);
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                w.omega[i] = boost::math::pdf(dist, tau_grid[i]);
                total += w.omega[i];
            }
            if (!(total > 0)) throw PolicyError("beta weights vanish on the tau grid");
            for (double& o : w.omega) o *= static_cast<double>(n) / total;
            break;
        }
        case WeightKind::point_mass: {
            std::size_t best = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (std::abs(tau_grid[i] - a) < std::abs(tau_grid[best] - a)) best = i;
            w.omega.assign(n, 0.0);
            w.omega[best] = static_cast<double>(n);
            break;
        }
    }
    return w;
}

std::vector<WeightScheme> default_schemes(const std::vector<double>& tau_grid) {
    return {make_weights(WeightKind::beta, 1, 1, tau_grid, "baseline"),
            make_weights(WeightKind::beta, 2, 2, tau_grid, "tails"),
            make_weights(WeightKind::beta, 5, 2, tau_grid, "pessimism"),
            make_weights(WeightKind::beta, 2, 5, tau_grid, "optimism")};
}

ReturnsCurve predict_fs(const std::vector<ReturnsCurve>& fq_curves, const WeightScheme& w) {
    if (fq_curves.size() != w.tau.size())
        throw PolicyError("need one F_Q curve per tau of the weight scheme");
    for (std::size_t t = 0; t < w.tau.size(); ++t) {
        if (std::abs(fq_curves[t].parameter - w.tau[t]) > 1e-9)
            throw PolicyError("tau mismatch between F_Q curves and weight scheme");
        if (fq_curves[t].grid != fq_curves.front().grid)
            throw PolicyError("F_Q curves must share a grid");
    }
    ReturnsCurve fs;
    fs.estimand = "FS";
    fs.label = w.name;
    fs.grid = fq_curves.front().grid;
    fs.values.assign(fs.grid.size(), 0.0);
    fs.extrapolated.assign(fs.grid.size(), false);
    const double n = static_cast<double>(w.tau.size());
    for (std::size_t j = 0; j < fs.grid.size(); ++j) {
        double sum = 0.0;
        for (std::size_t t = 0; t < w.tau.size(); ++t) {
            sum += w.omega[t] * fq_curves[t].values[j];
            if (!fq_curves[t].extrapolated.empty() && fq_curves[t].extrapolated[j])
                fs.extrapolated[j] = true;
        }
        fs.values[j] = sum / n;
    }
    make_monotone(fs);
    return fs;
}

double interpolate(const ReturnsCurve& c, double g) {
    if (c.grid.empty()) throw PolicyError("empty curve");
    if (g <= c.grid.front()) return c.values.front();
    if (g >= c.grid.back()) return c.values.back();
    const auto it = std::upper_bound(c.grid.begin(), c.grid.end(), g);
    const std::size_t j = static_cast<std::size_t>(it - c.grid.begin());
    const double t = (g - c.grid[j - 1]) / (c.grid[j] - c.grid[j - 1]);
    return c.values[j - 1] + t * (c.values[j] - c.values[j - 1]);
}

Inversion invert_fs(const ReturnsCurve& fs, double q) {
    if (fs.grid.empty()) throw PolicyError("empty curve");
    if (!(q > 0.0 && q < 1.0)) throw PolicyError("q must lie in (0,1)");
    const double top = fs.values.back();
    if (q > top) {
        std::ostringstream msg;
        msg << "q=" << q << " is above the attainable range [" << fs.values.front() << ", " << top
            << "]";
        throw PolicyError(msg.str());
    }
    if (q <= fs.values.front()) return {fs.grid.front(), true};
    std::size_t j = 1;
    while (fs.values[j] < q) ++j;
    const double v0 = fs.values[j - 1];
    const double v1 = fs.values[j];
    const double t = (q - v0) / (v1 - v0);
    return {fs.grid[j - 1] + t * (fs.grid[j] - fs.grid[j - 1]), false};
}

CostTable transfer_cost_curve(const ReturnsCurve& fs, const std::vector<double>& x_grid,
                              double baseline_wage, const std::string& scheme) {
    if (!(baseline_wage > 0)) throw PolicyError("baseline wage must be positive");
    CostTable table;
    table.scheme = scheme.empty() ? fs.label : scheme;
    table.baseline_wage = baseline_wage;
    table.f0 = interpolate(fs, 0.0);
    if (!(table.f0 > 0.0)) throw PolicyError("F_S(0) must be positive");
    for (double x : x_grid) {
        if (x < 0.0) throw PolicyError("expansion x must be nonnegative");
        CostRow row;
        row.x = x;
        const double q = table.f0 + x;
        if (q >= 1.0) throw PolicyError("F_S(0) + x reaches 1: expansion infeasible");
        const Inversion inv = invert_fs(fs, q);
        row.transfer = inv.value;
        row.left_boundary = inv.left_boundary;
        row.transfer_cost = q * row.transfer;
        row.cost_multiplier = row.transfer_cost / (table.f0 * baseline_wage);
        table.rows.push_back(row);
    }
    return table;
}

double cost_elasticity(const CostTable& table, ElasticityConvention convention) {
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [](const CostRow& r) { return std::abs(r.x - 0.01) < 1e-12; });
    if (it == table.rows.end()) throw PolicyError("cost table has no row at x = 0.01");
    // New bill (F0 + x)(wbar + T) against the baseline F0 wbar.
    const double growth = it->x / table.f0 + it->cost_multiplier;
    if (convention == ElasticityConvention::percentage_point) return 100.0 * growth;
    return growth / (it->x / table.f0);
}

std::string cost_tables_csv(const std::vector<CostTable>& tables,
                            const std::vector<std::string>& header) {
    auto num = [](double v) {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
        return std::string(buf, end);
    };
    std::ostringstream out;
    for (const auto& h : header) out << "# " << h << '\n';
    for (const auto& t : tables)
        out << "# scheme=" << t.scheme << " f0=" << num(t.f0)
            << " baseline_wage=" << num(t.baseline_wage) << '\n';
    out << "x,transfer_kcfa,transfer_cost,cost_multiplier,scheme\n";
    for (const auto& t : tables)
        for (const auto& r : t.rows)
            out << num(r.x) << ',' << num(r.transfer) << ',' << num(r.transfer_cost) << ','
                << num(r.cost_multiplier) << ',' << t.scheme << '\n';
    return out.str();
}

}  // namespace exante
