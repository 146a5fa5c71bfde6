#include "exante/dr.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "exante/error.hpp"
#include "exante/numerics.hpp"
#include "exante/parallel.hpp"
#include "json.hpp"

namespace exante {

double design_value(const Scenario& x, Attribute a) {
    const double v = attribute_value(x, a);
    return (a == Attribute::wage_pub || a == Attribute::wage_priv) ? v / 100.0 : v;
}

DesignMap::DesignMap(std::vector<std::string> features) : features_(std::move(features)) {
    if (features_.empty() || features_.front() != "intercept")
        throw FitError("design map must start with the intercept");
    std::set<std::string> seen;
    for (const auto& f : features_) {
        if (!seen.insert(f).second) throw FitError("duplicate design feature '" + f + "'");
        Term t;
        if (f != "intercept") {
            const auto star = f.find('*');
            try {
                if (star == std::string::npos) {
                    t.first = parse_attribute(f);
                } else {
                    t.first = parse_attribute(f.substr(0, star));
                    t.second = parse_attribute(f.substr(star + 1));
                }
            } catch (const DatasetError&) {
                throw FitError("unknown design feature '" + f + "'");
            }
        }
        terms_.push_back(t);
    }
}

DesignMap DesignMap::default_map() {
    return DesignMap({"intercept", "wage_pub", "wage_priv", "wage_pub*wage_priv", "employer_pub",
                      "employer_priv", "hours_pub", "hours_priv", "layoff_pub", "layoff_priv",
                      "promo_pub", "promo_priv"});
}

DesignMap DesignMap::intercept_only() { return DesignMap({"intercept"}); }

DesignMap DesignMap::extended(const std::vector<std::string>& extra) {
    std::vector<std::string> f = default_map().features();
    f.insert(f.end(), extra.begin(), extra.end());
    return DesignMap(std::move(f));
}

void DesignMap::row(const Scenario& x, double* out) const {
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        const Term& t = terms_[j];
        double v = 1.0;
        if (t.first) v *= design_value(x, *t.first);
        if (t.second) v *= design_value(x, *t.second);
        out[j] = v;
    }
}

Eigen::VectorXd DesignMap::row(const Scenario& x) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(size()));
    row(x, r.data());
    return r;
}

void ThresholdGrid::check() const {
    if (p.empty()) throw FitError("threshold grid is empty");
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!(p[k] > 0.0 && p[k] <= 1.0)) throw FitError("thresholds must lie in (0,1]");
        if (k > 0 && !(p[k] > p[k - 1])) throw FitError("thresholds must be strictly increasing");
    }
}

ThresholdGrid ThresholdGrid::from_quantiles(const Dataset& d) {
    std::vector<double> stated;
    stated.reserve(d.size());
    for (const auto& r : d.records()) stated.push_back(r.p_stated);
    std::sort(stated.begin(), stated.end());
    const double n = static_cast<double>(stated.size());
    ThresholdGrid g;
    for (int i = 1; i <= 49; ++i) {
        const double level = i / 50.0;
        auto idx = static_cast<std::size_t>(std::ceil(level * n - 1e-9));
        idx = std::clamp<std::size_t>(idx, 1, stated.size());
        const double q = stated[idx - 1];
        if (q <= 0.0 || q >= 1.0) continue;
        if (g.p.empty() || q > g.p.back()) g.p.push_back(q);
    }
    g.p.push_back(1.0);
    return g;
}

ThresholdGrid ThresholdGrid::uniform(int n) {
    if (n < 1) throw FitError("uniform grid needs n >= 1");
    ThresholdGrid g;
    for (int i = 1; i <= n; ++i) g.p.push_back(static_cast<double>(i) / n);
    return g;
}

double CdfProfile::cdf_at(double p) const {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0 - 1e-8) return 1.0;
    const auto it = std::upper_bound(grid->begin(), grid->end(), p + 1e-12);
    if (it == grid->begin()) return 0.0;
    return values[static_cast<std::size_t>(it - grid->begin()) - 1];
}

double CdfProfile::quantile_at(double a) const {
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double v = (*grid)[k] >= 1.0 - 1e-8 ? 1.0 : values[k];
        if (v >= a) return (*grid)[k];
    }
    return 1.0;
}

DRModel::DRModel(DesignMap map, ThresholdGrid grid, Eigen::MatrixXd coef,
                 std::vector<ThresholdDiagnostics> diag, bool rearranged)
    : map_(std::move(map)),
      grid_(std::move(grid)),
      coef_(std::move(coef)),
      diag_(std::move(diag)),
      rearranged_(rearranged) {
    grid_.check();
    if (coef_.rows() != static_cast<Eigen::Index>(grid_.p.size()) ||
        coef_.cols() != static_cast<Eigen::Index>(map_.size()))
        throw FitError("coefficient matrix does not match grid and design");
    if (!coef_.allFinite()) throw FitError("coefficients must be finite");
}

std::vector<double> DRModel::raw_values(const Scenario& x) const {
    const Eigen::VectorXd w = map_.row(x);
    const Eigen::VectorXd index = coef_ * w;
    std::vector<double> v(static_cast<std::size_t>(index.size()));
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = std::clamp(logistic(index(static_cast<Eigen::Index>(k))), kProbClamp,
                          1.0 - kProbClamp);
    return v;
}

std::vector<double> rearrange_values(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values;
}

CdfProfile DRModel::profile(const Scenario& x) const {
    CdfProfile p;
    p.grid = &grid_.p;
    p.values = raw_values(x);
    if (rearranged_) p.values = rearrange_values(std::move(p.values));
    return p;
}

double DRModel::cdf_at(double p, const Scenario& x) const { return profile(x).cdf_at(p); }

double DRModel::quantile_at(double a, const Scenario& x) const {
    return profile(x).quantile_at(a);
}

DRModel rearrange(const DRModel& m) {
    DRModel out = m;
    out.set_rearranged(true);
    return out;
}

namespace {

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

struct ThresholdFit {
    Eigen::VectorXd beta;
    ThresholdDiagnostics diag;
    std::string error;
};

// Normalised penalised log-likelihood: sum_i w_i l_i - ridge |beta_{-0}|^2,
// weights summing to one.
double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& beta, double ridge) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += w(i) * (y(i) * eta(i) - softplus(eta(i)));
    return ll - ridge * beta.tail(beta.size() - 1).squaredNorm();
}

ThresholdFit fit_threshold(const Eigen::MatrixXd& x, const Eigen::VectorXd& w_raw,
                           const Eigen::VectorXd& y, double threshold, const FitOptions& opt,
                           const Eigen::VectorXd* start) {
    const Eigen::Index d = x.cols();
    const double total = w_raw.sum();
    const Eigen::VectorXd w = w_raw / total;
    const double share = w.dot(y);
    ThresholdFit fit;
    fit.diag.threshold = threshold;
    fit.beta = Eigen::VectorXd::Zero(d);

    auto loglik = [&](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd eta = x * beta;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < eta.size(); ++i)
            ll += w_raw(i) * (y(i) * eta(i) - softplus(eta(i)));
        return ll;
    };

    bool all_equal = true;
    for (Eigen::Index i = 1; i < y.size() && all_equal; ++i) all_equal = y(i) == y(0);
    if (all_equal) {
        fit.beta(0) = y(0) > 0.5 ? logit(1.0 - kProbClamp) : logit(kProbClamp);
        fit.diag.degenerate = true;
        fit.diag.loglik = loglik(fit.beta);
        return fit;
    }

    if (start) {
        fit.beta = *start;
    } else {
        fit.beta(0) = logit(std::clamp(share, kProbClamp, 1.0 - kProbClamp));
    }
    Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d, 2.0 * opt.ridge);
    penalty(0) = 0.0;

    double f = objective(x, w, y, fit.beta, opt.ridge);
    fit.diag.converged = false;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        fit.diag.iterations = it;
        const Eigen::VectorXd eta = x * fit.beta;
        Eigen::VectorXd mu(eta.size()), curv(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            mu(i) = logistic(eta(i));
            curv(i) = w(i) * mu(i) * (1.0 - mu(i));
        }
        const Eigen::VectorXd grad =
            x.transpose() * (w.array() * (y - mu).array()).matrix() -
            (penalty.array() * fit.beta.array()).matrix();
        Eigen::MatrixXd hess = x.transpose() * (x.array().colwise() * curv.array()).matrix();
        hess.diagonal() += penalty;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            std::ostringstream msg;
            msg << "singular penalized normal equations at threshold p=" << threshold;
            fit.error = msg.str();
            return fit;
        }
        // Step halving keeps the objective nondecreasing up to roundoff in f,
        // so Newton steps near the optimum are still taken.
        const double slack = 1e-14 * (1.0 + std::abs(f));
        double t = 1.0;
        Eigen::VectorXd candidate = fit.beta + step;
        double f_new = objective(x, w, y, candidate, opt.ridge);
        while (!(f_new >= f - slack) && t > 1e-12) {
            t *= 0.5;
            candidate = fit.beta + t * step;
            f_new = objective(x, w, y, candidate, opt.ridge);
        }
        if (!(f_new >= f - slack)) {
            // No ascent available at working precision: at the optimum.
            fit.diag.converged = step.cwiseAbs().maxCoeff() < std::sqrt(opt.tolerance);
            break;
        }
        const double change = (t * step).cwiseAbs().maxCoeff();
        fit.beta = candidate;
        f = f_new;
        if (change < opt.tolerance) {
            fit.diag.converged = true;
            break;
        }
    }
    const Eigen::VectorXd eta = x * fit.beta;
    fit.diag.separation = eta.size() > 0 && eta.cwiseAbs().maxCoeff() > opt.separation_index;
    fit.diag.loglik = loglik(fit.beta);
    return fit;
}

struct FitOutcome {
    Eigen::MatrixXd coef;
    std::vector<ThresholdDiagnostics> diag;
    std::vector<std::string> errors;  // per threshold, empty when fine
};

FitOutcome fit_all(const Dataset& d, const ThresholdGrid& grid, const DesignMap& map,
                   const std::vector<double>& weights, const FitOptions& opt) {
    grid.check();
    const std::size_t n = d.size();
    const auto dim = static_cast<Eigen::Index>(map.size());
    if (n < map.size() + 1)
        throw FitError("need at least dim(W)+1 = " + std::to_string(map.size() + 1) + " records");
    if (!weights.empty() && weights.size() != n)
        throw FitError("weights must have one entry per record");
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), dim);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    Eigen::RowVectorXd r(dim);
    for (std::size_t i = 0; i < n; ++i) {
        map.row(d.records()[i].scenario, r.data());
        x.row(static_cast<Eigen::Index>(i)) = r;
        const double wi = weights.empty() ? 1.0 : weights[i];
        if (!(wi > 0) || !std::isfinite(wi)) throw FitError("weights must be positive");
        w(static_cast<Eigen::Index>(i)) = wi;
    }
    if (opt.warm_start &&
        (opt.warm_start->rows() != static_cast<Eigen::Index>(grid.p.size()) ||
         opt.warm_start->cols() != dim))
        throw FitError("warm start does not match grid and design");

    const std::size_t k_count = grid.p.size();
    FitOutcome out;
    out.coef = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_count), dim);
    out.diag.resize(k_count);
    out.errors.resize(k_count);
    auto body = [&](std::size_t k) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            y(static_cast<Eigen::Index>(i)) = d.records()[i].p_stated <= grid.p[k] ? 1.0 : 0.0;
        Eigen::VectorXd start;
        if (opt.warm_start) start = opt.warm_start->row(static_cast<Eigen::Index>(k)).transpose();
        ThresholdFit f = fit_threshold(x, w, y, grid.p[k], opt, opt.warm_start ? &start : nullptr);
        out.coef.row(static_cast<Eigen::Index>(k)) = f.beta.transpose();
        out.diag[k] = f.diag;
        out.errors[k] = f.error;
    };
    if (opt.parallel) {
        parallel_for(k_count, body);
    } else {
        for (std::size_t k = 0; k < k_count; ++k) body(k);
    }
    return out;
}

}  // namespace

DRModel fit_dr(const Dataset& d, const ThresholdGrid& grid, const DesignMap& map,
               const std::vector<double>& weights, const FitOptions& opt) {
    FitOutcome out = fit_all(d, grid, map, weights, opt);
    for (const auto& e : out.errors)
        if (!e.empty()) throw FitError(e);
    return DRModel(map, grid, std::move(out.coef), std::move(out.diag), opt.rearrange);
}

std::vector<double> bootstrap_weights(const Dataset& d, std::uint64_t seed, int replicate) {
    Rng rng = make_rng(mix_seed(seed, static_cast<std::uint64_t>(replicate)), 0);
    std::vector<double> per_respondent(d.respondent_count());
    for (double& e : per_respondent) e = -std::log(uniform_open(rng));
    std::vector<double> w(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) w[i] = per_respondent[d.respondent_index()[i]];
    return w;
}

BootstrapResult bootstrap_fits(const Dataset& d, const ThresholdGrid& grid, const DesignMap& map,
                               int replicates, std::uint64_t seed, const BootstrapOptions& opt) {
    BootstrapResult result;
    if (replicates <= 0) return result;
    FitOptions fo = opt.fit;
    fo.parallel = false;
    if (opt.main_fit) fo.warm_start = &opt.main_fit->coefficients();
    const std::size_t k_count = grid.p.size();
    std::vector<std::optional<DRModel>> fits(static_cast<std::size_t>(replicates));
    std::vector<std::string> reasons(static_cast<std::size_t>(replicates));
    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t b) {
        const std::vector<double> w = opt.unit_weights
                                          ? std::vector<double>(d.size(), 1.0)
                                          : bootstrap_weights(d, seed, static_cast<int>(b));
        FitOutcome out = fit_all(d, grid, map, w, fo);
        std::size_t failed = 0;
        for (std::size_t k = 0; k < k_count; ++k) {
            if (out.errors[k].empty()) continue;
            ++failed;
            reasons[b] = out.errors[k];
            out.diag[k].converged = false;
            if (opt.main_fit)
                out.coef.row(static_cast<Eigen::Index>(k)) =
                    opt.main_fit->coefficients().row(static_cast<Eigen::Index>(k));
        }
        if (static_cast<double>(failed) > 0.001 * static_cast<double>(k_count)) return;
        reasons[b].clear();
        fits[b].emplace(map, grid, std::move(out.coef), std::move(out.diag), fo.rearrange);
    });
    for (std::size_t b = 0; b < fits.size(); ++b) {
        if (fits[b]) result.fits.push_back(std::move(*fits[b]));
        else result.dropped.emplace_back(static_cast<int>(b), reasons[b]);
    }
    return result;
}

std::string model_to_json(const DRModel& m) {
    nlohmann::json j;
    j["format"] = "exante-dr-model";
    j["version"] = 1;
    j["design"] = m.design().features();
    j["grid"] = m.grid().p;
    nlohmann::json coef = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.coefficients().rows(); ++k) {
        std::vector<double> row(static_cast<std::size_t>(m.coefficients().cols()));
        for (Eigen::Index c = 0; c < m.coefficients().cols(); ++c)
            row[static_cast<std::size_t>(c)] = m.coefficients()(k, c);
        coef.push_back(row);
    }
    j["coefficients"] = coef;
    j["rearranged"] = m.rearranged();
    nlohmann::json diag = nlohmann::json::array();
    for (const auto& t : m.diagnostics())
        diag.push_back({{"threshold", t.threshold},
                        {"loglik", t.loglik},
                        {"iterations", t.iterations},
                        {"separation", t.separation},
                        {"converged", t.converged},
                        {"degenerate", t.degenerate}});
    j["diagnostics"] = diag;
    return j.dump(1);
}

DRModel model_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", "") != "exante-dr-model") throw FitError("not a model file");
        DesignMap map(j.at("design").get<std::vector<std::string>>());
        ThresholdGrid grid{j.at("grid").get<std::vector<double>>()};
        const auto& rows = j.at("coefficients");
        Eigen::MatrixXd coef(static_cast<Eigen::Index>(rows.size()),
                             static_cast<Eigen::Index>(map.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto row = rows[k].get<std::vector<double>>();
            if (row.size() != map.size()) throw FitError("coefficient row has wrong length");
            for (std::size_t c = 0; c < row.size(); ++c)
                coef(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = row[c];
        }
        std::vector<ThresholdDiagnostics> diag;
        for (const auto& t : j.value("diagnostics", nlohmann::json::array())) {
            ThresholdDiagnostics td;
            td.threshold = t.at("threshold").get<double>();
            td.loglik = t.at("loglik").get<double>();
            td.iterations = t.at("iterations").get<int>();
            td.separation = t.at("separation").get<bool>();
            td.converged = t.at("converged").get<bool>();
            td.degenerate = t.value("degenerate", false);
            diag.push_back(td);
        }
        return DRModel(std::move(map), std::move(grid), std::move(coef), std::move(diag),
                       j.at("rearranged").get<bool>());
    } catch (const nlohmann::json::exception& e) {
        throw FitError(std::string("malformed model json: ") + e.what());
    }
}

std::string diagnostics_csv(const DRModel& m, const std::vector<std::string>& header) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& h : header) out << "# " << h << '\n';
    out << "threshold,loglik,iterations,separation,converged,degenerate\n";
    for (const auto& t : m.diagnostics())
        out << t.threshold << ',' << t.loglik << ',' << t.iterations << ',' << t.separation << ','
            << t.converged << ',' << t.degenerate << '\n';
    return out.str();
}

}  // namespace exante
