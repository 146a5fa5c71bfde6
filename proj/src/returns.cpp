#include "exante/returns.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "exante/error.hpp"
#include "exante/numerics.hpp"
#include "exante/parallel.hpp"

namespace exante {

void SGrid::check() const {
    if (s.empty()) throw ReturnsError("s-grid is empty");
    for (std::size_t j = 1; j < s.size(); ++j)
        if (!(s[j] > s[j - 1])) throw ReturnsError("s-grid must be strictly increasing");
    if (!std::binary_search(s.begin(), s.end(), 0.0)) throw ReturnsError("s-grid must contain 0");
}

SGrid SGrid::uniform(const SupportSpec& support, double lo, double hi, double step) {
    if (!(step > 0)) throw ReturnsError("s-grid step must be positive");
    if (!(lo <= 0.0 && hi >= 0.0)) throw ReturnsError("s-grid range must contain 0");
    SGrid g;
    g.support = support;
    const auto first = static_cast<long>(std::ceil(lo / step - 1e-9));
    const auto last = static_cast<long>(std::floor(hi / step + 1e-9));
    for (long k = first; k <= last; ++k) g.s.push_back(static_cast<double>(k) * step);
    g.check();
    return g;
}

SGrid SGrid::from_support(const SupportSpec& support, double step) {
    const double span = support.wage_priv.max - support.wage_priv.min;
    return uniform(support, -span, span, step);
}

std::vector<bool> SGrid::extrapolated(const Scenario& x) const {
    std::vector<bool> out(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) out[j] = !in_identified_region(support, s[j], x);
    return out;
}

std::vector<double> SGrid::weights() const {
    const std::size_t n = s.size();
    std::vector<double> w(n, 0.0);
    if (n < 2) return w;
    w[0] = 0.5 * (s[1] - s[0]);
    w[n - 1] = 0.5 * (s[n - 1] - s[n - 2]);
    for (std::size_t j = 1; j + 1 < n; ++j) w[j] = 0.5 * (s[j + 1] - s[j - 1]);
    return w;
}

std::vector<double> midpoint_grid(int n) {
    if (n < 1) throw ReturnsError("a-grid needs at least one point");
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = (i + 0.5) / n;
    return a;
}

ProfileTable::ProfileTable(const DRModel& m, const Scenario& x, const SGrid& grid)
    : extrapolated_(grid.extrapolated(x)) {
    const SupportSpec& sup = grid.support;
    const bool any_identified =
        std::find(extrapolated_.begin(), extrapolated_.end(), false) != extrapolated_.end();
    const double lo = sup.wage_priv.min - x.wage_option0();
    const double hi = sup.wage_priv.max - x.wage_option0();
    profiles_.reserve(grid.s.size());
    for (std::size_t j = 0; j < grid.s.size(); ++j) {
        double s = grid.s[j];
        if (extrapolated_[j] && any_identified) s = std::clamp(s, lo, hi);
        profiles_.push_back(m.profile(x.shifted(s)));
    }
}

bool quantile_above(double q, double tau) { return q >= (1.0 - tau) - 1e-12; }

namespace {

template <class Integrand>
AIntegral integrate(const ProfileTable& t, const SGrid& grid, Integrand&& f) {
    const std::vector<double> w = grid.weights();
    AIntegral out;
    for (std::size_t j = 0; j < t.size(); ++j) out.value += w[j] * f(j);
    if (t.size() > 0) {
        out.integrand_first = f(0);
        out.integrand_last = f(t.size() - 1);
    }
    return out;
}

double below_zero(double s) { return s <= 0.0 ? 1.0 : 0.0; }

void check_tau(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ReturnsError("tau must lie in (0,1)");
}

void check_level(double a) {
    if (!(a > 0.0 && a < 1.0)) throw ReturnsError("rank a must lie in (0,1)");
}

}  // namespace

AIntegral a_mu(const ProfileTable& t, const SGrid& grid, double a) {
    check_level(a);
    return integrate(t, grid, [&](std::size_t j) { return t.q(j, a) - below_zero(grid.s[j]); });
}

AIntegral a_tau(const ProfileTable& t, const SGrid& grid, double a, double tau) {
    check_level(a);
    check_tau(tau);
    return integrate(t, grid, [&](std::size_t j) {
        return (quantile_above(t.q(j, a), tau) ? 1.0 : 0.0) - below_zero(grid.s[j]);
    });
}

AIntegral a_iqr(const ProfileTable& t, const SGrid& grid, double a, double tau1, double tau2) {
    check_level(a);
    check_tau(tau1);
    check_tau(tau2);
    if (!(tau1 < tau2)) throw ReturnsError("need tau1 < tau2");
    return integrate(t, grid, [&](std::size_t j) {
        const double q = t.q(j, a);
        return (quantile_above(q, tau2) ? 1.0 : 0.0) - (quantile_above(q, tau1) ? 1.0 : 0.0);
    });
}

AIntegral a_mu(const DRModel& m, const Scenario& x, double a, const SGrid& grid) {
    return a_mu(ProfileTable(m, x, grid), grid, a);
}

AIntegral a_tau(const DRModel& m, const Scenario& x, double a, double tau, const SGrid& grid) {
    return a_tau(ProfileTable(m, x, grid), grid, a, tau);
}

AIntegral a_iqr(const DRModel& m, const Scenario& x, double a, double tau1, double tau2,
                const SGrid& grid) {
    return a_iqr(ProfileTable(m, x, grid), grid, a, tau1, tau2);
}

namespace {

double total_mass(const ScenarioMix& x_tilde) {
    if (x_tilde.empty()) throw ReturnsError("x_tilde is empty");
    double total = 0.0;
    for (const auto& w : x_tilde) {
        if (!(w.mass > 0)) throw ReturnsError("x_tilde masses must be positive");
        total += w.mass;
    }
    return total;
}

void check_grid(const std::vector<double>& y) {
    for (std::size_t j = 1; j < y.size(); ++j)
        if (!(y[j] > y[j - 1])) throw ReturnsError("y-grid must be increasing");
}

// Population cdf of a per-(x, a) summary: sum_j mass_j mean_a 1{A(x_j, a) <= y}.
template <class Summary>
ReturnsCurve rank_integral_cdf(const ScenarioMix& x_tilde, const std::vector<double>& y_grid,
                               int a_points, Summary&& summary) {
    check_grid(y_grid);
    const double total = total_mass(x_tilde);
    const std::vector<double> a = midpoint_grid(a_points);
    ReturnsCurve c;
    c.grid = y_grid;
    c.values.assign(y_grid.size(), 0.0);
    for (const auto& w : x_tilde) {
        std::vector<double> values = summary(w.x, a);
        std::sort(values.begin(), values.end());
        for (std::size_t j = 0; j < y_grid.size(); ++j) {
            const auto count = std::upper_bound(values.begin(), values.end(), y_grid[j]) - values.begin();
            c.values[j] += w.mass / total * static_cast<double>(count) / static_cast<double>(a.size());
        }
    }
    make_monotone(c);
    return c;
}

}  // namespace

ReturnsCurve fq_curve(const DRModel& m, double tau, const SGrid& grid, const ScenarioMix& x_tilde) {
    check_tau(tau);
    grid.check();
    const double total = total_mass(x_tilde);
    ReturnsCurve c;
    c.estimand = "FQ";
    c.parameter = tau;
    c.grid = grid.s;
    c.values.assign(grid.s.size(), 0.0);
    c.extrapolated.assign(grid.s.size(), false);
    for (const auto& w : x_tilde) {
        const std::vector<bool> mask = grid.extrapolated(w.x);
        std::vector<double> v(grid.s.size());
        parallel_for(grid.s.size(), [&](std::size_t j) {
            v[j] = m.cdf_at(1.0 - tau, w.x.shifted(grid.s[j]));
        });
        for (std::size_t j = 0; j < v.size(); ++j) {
            c.values[j] += w.mass / total * v[j];
            if (mask[j]) c.extrapolated[j] = true;
        }
    }
    make_monotone(c);
    return c;
}

ReturnsCurve dist_mu(const DRModel& m, const ScenarioMix& x_tilde, const std::vector<double>& y_grid,
                     const SGrid& s_grid, int a_points) {
    s_grid.check();
    ReturnsCurve c = rank_integral_cdf(x_tilde, y_grid, a_points,
                                       [&](const Scenario& x, const std::vector<double>& a) {
                                           const ProfileTable t(m, x, s_grid);
                                           std::vector<double> out(a.size());
                                           parallel_for(a.size(), [&](std::size_t i) {
                                               out[i] = a_mu(t, s_grid, a[i]).value;
                                           });
                                           return out;
                                       });
    c.estimand = "mu";
    return c;
}

ReturnsCurve dist_iqr(const DRModel& m, const ScenarioMix& x_tilde, double tau1, double tau2,
                      const std::vector<double>& y_grid, const SGrid& s_grid, int a_points) {
    s_grid.check();
    ReturnsCurve c = rank_integral_cdf(x_tilde, y_grid, a_points,
                                       [&](const Scenario& x, const std::vector<double>& a) {
                                           const ProfileTable t(m, x, s_grid);
                                           std::vector<double> out(a.size());
                                           parallel_for(a.size(), [&](std::size_t i) {
                                               out[i] = a_iqr(t, s_grid, a[i], tau1, tau2).value;
                                           });
                                           return out;
                                       });
    c.estimand = "iqr";
    c.parameter = tau2 - tau1;
    return c;
}

RankPairs pseudo_ranks(const DRModel& m, const Dataset& d, const PairRule& rule) {
    std::vector<std::vector<std::size_t>> by_respondent(d.respondent_count());
    for (std::size_t i = 0; i < d.size(); ++i) by_respondent[d.respondent_index()[i]].push_back(i);
    RankPairs out;
    for (auto& idx : by_respondent) {
        if (idx.size() < 2) continue;
        const ChoiceRecord* r1 = nullptr;
        const ChoiceRecord* r2 = nullptr;
        if (rule.first == 0) {
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                return d.records()[a].scenario_index < d.records()[b].scenario_index;
            });
            r1 = &d.records()[idx[0]];
            r2 = &d.records()[idx[1]];
        } else {
            for (std::size_t i : idx) {
                if (d.records()[i].scenario_index == rule.first) r1 = &d.records()[i];
                if (d.records()[i].scenario_index == rule.second) r2 = &d.records()[i];
            }
            if (!r1 || !r2) continue;
        }
        RankPair p;
        p.respondent_id = r1->respondent_id;
        p.x1 = r1->scenario;
        p.x2 = r2->scenario;
        p.v1 = m.cdf_at(r1->p_stated, r1->scenario);
        p.v2 = m.cdf_at(r2->p_stated, r2->scenario);
        out.pairs.push_back(std::move(p));
    }
    if (out.pairs.empty())
        throw ReturnsError(
            "no respondent has two eligible scenarios: qWTP/mWTP distributions need two "
            "elicited scenarios per respondent");
    return out;
}

std::string to_string(CopulaKind k) {
    switch (k) {
        case CopulaKind::independence: return "independence";
        case CopulaKind::comonotone: return "comonotone";
        case CopulaKind::checkerboard: return "checkerboard";
        case CopulaKind::empirical: return "empirical";
    }
    return "?";
}

CopulaKind parse_copula_kind(const std::string& s) {
    if (s == "independence") return CopulaKind::independence;
    if (s == "comonotone") return CopulaKind::comonotone;
    if (s == "checkerboard") return CopulaKind::checkerboard;
    if (s == "empirical") return CopulaKind::empirical;
    throw ReturnsError("unknown copula kind '" + s + "'");
}

double CopulaModel::spearman() const {
    double e = 0.0;
    for (const auto& at : atoms) e += at.mass * at.v1 * at.v2;
    return 12.0 * e - 3.0;
}

namespace {

std::vector<double> rank_scores(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = rank / (static_cast<double>(n) + 1.0);
        i = j + 1;
    }
    return r;
}

void sinkhorn(std::vector<double>& m, int bins) {
    const double target = 1.0 / bins;
    auto idx = [bins](int i, int j) { return static_cast<std::size_t>(i * bins + j); };
    // Empty rows or columns cannot be rescaled; give them a small pseudo-mass.
    for (int i = 0; i < bins; ++i) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < bins; ++j) {
            row += m[idx(i, j)];
            col += m[idx(j, i)];
        }
        if (row == 0.0)
            for (int j = 0; j < bins; ++j) m[idx(i, j)] += 1e-6 * target;
        if (col == 0.0)
            for (int j = 0; j < bins; ++j) m[idx(j, i)] += 1e-6 * target;
    }
    for (int it = 0; it < 100000; ++it) {
        double worst = 0.0;
        for (int i = 0; i < bins; ++i) {
            double row = 0.0;
            for (int j = 0; j < bins; ++j) row += m[idx(i, j)];
            for (int j = 0; j < bins; ++j) m[idx(i, j)] *= target / row;
        }
        for (int j = 0; j < bins; ++j) {
            double col = 0.0;
            for (int i = 0; i < bins; ++i) col += m[idx(i, j)];
            for (int i = 0; i < bins; ++i) m[idx(i, j)] *= target / col;
        }
        for (int i = 0; i < bins; ++i) {
            double row = 0.0;
            for (int j = 0; j < bins; ++j) row += m[idx(i, j)];
            worst = std::max(worst, std::abs(row - target));
        }
        if (worst < 1e-9) break;
    }
}

}  // namespace

CopulaModel fit_copula(const RankPairs& pairs, CopulaKind kind, int bins, int a_points) {
    if (bins < 1) throw ReturnsError("copula needs at least one bin");
    CopulaModel c;
    c.kind = kind;
    c.bins = bins;
    const auto m2 = static_cast<std::size_t>(bins * bins);
    auto cell_atoms = [&] {
        for (int i = 0; i < bins; ++i)
            for (int j = 0; j < bins; ++j)
                c.atoms.push_back({(i + 0.5) / bins, (j + 0.5) / bins, c.mass(i, j)});
    };
    switch (kind) {
        case CopulaKind::independence:
            c.masses.assign(m2, 1.0 / static_cast<double>(m2));
            cell_atoms();
            break;
        case CopulaKind::comonotone:
            c.masses.assign(m2, 0.0);
            for (int i = 0; i < bins; ++i) c.masses[static_cast<std::size_t>(i * bins + i)] = 1.0 / bins;
            for (double a : midpoint_grid(a_points)) c.atoms.push_back({a, a, 1.0 / a_points});
            break;
        case CopulaKind::checkerboard: {
            if (pairs.pairs.size() < 50)
                throw ReturnsError("checkerboard copula needs at least 50 pairs (have " +
                                   std::to_string(pairs.pairs.size()) +
                                   "); use the independence kind instead");
            c.masses.assign(m2, 0.0);
            const double n = static_cast<double>(pairs.pairs.size());
            auto bin_of = [bins](double v) {
                return std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1);
            };
            for (const auto& p : pairs.pairs)
                c.masses[static_cast<std::size_t>(bin_of(p.v1) * bins + bin_of(p.v2))] += 1.0 / n;
            sinkhorn(c.masses, bins);
            cell_atoms();
            break;
        }
        case CopulaKind::empirical: {
            if (pairs.pairs.empty()) throw ReturnsError("empirical copula needs pairs");
            std::vector<double> v1, v2;
            for (const auto& p : pairs.pairs) {
                v1.push_back(p.v1);
                v2.push_back(p.v2);
            }
            const auto r1 = rank_scores(v1);
            const auto r2 = rank_scores(v2);
            const double w = 1.0 / static_cast<double>(r1.size());
            for (std::size_t i = 0; i < r1.size(); ++i) c.atoms.push_back({r1[i], r2[i], w});
            break;
        }
    }
    return c;
}

namespace {

// Pr(A(x+h, V2) - A(x, V1) <= y) over copula atoms and x_tilde masses.
template <class AFunction>
ReturnsCurve wtp_distribution(const DRModel& m, const CopulaModel& copula,
                              const ScenarioMix& x_tilde, const AttributeShift& h,
                              const std::vector<double>& y_grid, const SGrid& s_grid,
                              AFunction&& a_value) {
    check_grid(y_grid);
    s_grid.check();
    if (copula.atoms.empty()) throw ReturnsError("copula has no atoms");
    const double total = total_mass(x_tilde);
    ReturnsCurve c;
    c.grid = y_grid;
    c.values.assign(y_grid.size(), 0.0);
    c.extrapolated.assign(y_grid.size(), false);
    for (const auto& w : x_tilde) {
        Scenario xh = w.x;
        shift_attribute(xh, h.attribute, h.delta);
        if (!s_grid.support.contains(xh) || !s_grid.support.contains(w.x)) {
            c.notes.push_back("x+h outside support for a shift of " + to_string(h.attribute) +
                              "; distribution masked");
            std::fill(c.extrapolated.begin(), c.extrapolated.end(), true);
        }
        const ProfileTable base(m, w.x, s_grid);
        const ProfileTable shifted(m, xh, s_grid);

        // A-integrals at every distinct rank, computed once.
        std::map<double, std::size_t> slot1, slot2;
        for (const auto& at : copula.atoms) {
            slot1.emplace(at.v1, 0);
            slot2.emplace(at.v2, 0);
        }
        std::vector<double> ranks1, ranks2;
        for (auto& [v, i] : slot1) {
            i = ranks1.size();
            ranks1.push_back(v);
        }
        for (auto& [v, i] : slot2) {
            i = ranks2.size();
            ranks2.push_back(v);
        }
        std::vector<double> a1(ranks1.size()), a2(ranks2.size());
        parallel_for(ranks1.size(), [&](std::size_t i) { a1[i] = a_value(base, ranks1[i]); });
        parallel_for(ranks2.size(), [&](std::size_t i) { a2[i] = a_value(shifted, ranks2[i]); });

        std::vector<std::pair<double, double>> diffs;
        diffs.reserve(copula.atoms.size());
        for (const auto& at : copula.atoms)
            diffs.emplace_back(a2[slot2.at(at.v2)] - a1[slot1.at(at.v1)], at.mass);
        std::sort(diffs.begin(), diffs.end());
        std::size_t k = 0;
        double cum = 0.0;
        for (std::size_t j = 0; j < y_grid.size(); ++j) {
            while (k < diffs.size() && diffs[k].first <= y_grid[j]) cum += diffs[k++].second;
            c.values[j] += w.mass / total * cum;
        }
    }
    make_monotone(c);
    return c;
}

}  // namespace

ReturnsCurve dist_qwtp(const DRModel& m, const CopulaModel& copula, const ScenarioMix& x_tilde,
                       const AttributeShift& h, double tau, const std::vector<double>& y_grid,
                       const SGrid& s_grid) {
    check_tau(tau);
    ReturnsCurve c = wtp_distribution(m, copula, x_tilde, h, y_grid, s_grid,
                                      [&](const ProfileTable& t, double v) {
                                          return a_tau(t, s_grid, v, tau).value;
                                      });
    c.estimand = "qwtp";
    c.parameter = tau;
    return c;
}

ReturnsCurve dist_mwtp(const DRModel& m, const CopulaModel& copula, const ScenarioMix& x_tilde,
                       const AttributeShift& h, const std::vector<double>& y_grid,
                       const SGrid& s_grid) {
    ReturnsCurve c = wtp_distribution(m, copula, x_tilde, h, y_grid, s_grid,
                                      [&](const ProfileTable& t, double v) {
                                          return a_mu(t, s_grid, v).value;
                                      });
    c.estimand = "mwtp";
    return c;
}

}  // namespace exante
