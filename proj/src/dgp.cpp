#include "exante/dgp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "exante/error.hpp"
#include "exante/parallel.hpp"

namespace exante {

std::string to_string(DgpKind k) {
    return k == DgpKind::ces_lognormal ? "ces_lognormal" : "gaussian_linear";
}

DgpKind parse_dgp_kind(const std::string& s) {
    if (s == "ces_lognormal") return DgpKind::ces_lognormal;
    if (s == "gaussian_linear") return DgpKind::gaussian_linear;
    throw DgpError("unknown kind '" + s + "'");
}

std::string to_string(ParamDist::Kind k) {
    switch (k) {
        case ParamDist::Kind::degenerate: return "degenerate";
        case ParamDist::Kind::uniform: return "uniform";
        case ParamDist::Kind::normal: return "normal";
        case ParamDist::Kind::logistic: return "logistic";
    }
    return "?";
}

ParamDist::Kind parse_param_kind(const std::string& s) {
    if (s == "degenerate") return ParamDist::Kind::degenerate;
    if (s == "uniform") return ParamDist::Kind::uniform;
    if (s == "normal") return ParamDist::Kind::normal;
    if (s == "logistic") return ParamDist::Kind::logistic;
    throw DgpError("unknown distribution '" + s + "'");
}

double ParamDist::draw(Rng& rng) const {
    switch (kind) {
        case Kind::degenerate: return a;
        case Kind::uniform: return a + (b - a) * uniform_open(rng);
        case Kind::normal: return a + b * normal_quantile(uniform_open(rng));
        case Kind::logistic: return a + b * logit(uniform_open(rng));
    }
    return a;
}

double ParamDist::lower() const {
    switch (kind) {
        case Kind::degenerate:
        case Kind::uniform: return a;
        default: return -std::numeric_limits<double>::infinity();
    }
}

double ParamDist::upper() const {
    switch (kind) {
        case Kind::degenerate: return a;
        case Kind::uniform: return b;
        default: return std::numeric_limits<double>::infinity();
    }
}

double ParamDist::mean() const { return kind == Kind::uniform ? 0.5 * (a + b) : a; }

void ParamDist::check(const std::string& name) const {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DgpError(name + ": parameters must be finite");
    if (kind == Kind::uniform && !(a <= b)) throw DgpError(name + ": uniform needs a <= b");
    if ((kind == Kind::normal || kind == Kind::logistic) && !(b > 0))
        throw DgpError(name + ": scale must be positive");
}

void DgpConfig::check() const {
    alpha.check("alpha");
    beta.check("beta");
    rho.check("rho");
    taste.check("taste");
    if (!(alpha.lower() > 0.0 && alpha.upper() < 1.0))
        throw DgpError("alpha must lie in (0,1) almost surely");
    if (!(rho.lower() > -1.0 && rho.upper() < 1.0))
        throw DgpError("rho must lie in (-1,1) almost surely");
    if (kind == DgpKind::gaussian_linear) {
        if (!(beta.kind == ParamDist::Kind::degenerate && beta.a == 1.0))
            throw DgpError("gaussian_linear requires beta degenerate at 1");
        if (!(sigma_a > 0)) throw DgpError("sigma_a must be positive");
        if (!(sigma_floor > 0)) throw DgpError("sigma_floor must be positive");
    } else {
        if (!signed_power && !(beta.lower() > 0.0 && beta.upper() <= 1.0))
            throw DgpError("ces_lognormal requires beta in (0,1] unless signed_power is set");
        if (!(ces_s0 >= 0 && ces_s1 >= 0)) throw DgpError("lognormal scales must be >= 0");
        if (quadrature_nodes < 8) throw DgpError("quadrature_nodes must be >= 8");
    }
    for (const auto* loadings : {&gamma, &kappa, &lambda})
        for (const auto& [attr, v] : *loadings) {
            if (attr == Attribute::wage_pub || attr == Attribute::wage_priv)
                throw DgpError("attribute loadings cannot be placed on wages");
            if (!std::isfinite(v)) throw DgpError("attribute loading must be finite");
        }
    if (scenarios_per_respondent < 1) throw DgpError("scenarios per respondent T must be >= 1");
    if (respondents < 1) throw DgpError("respondents N must be >= 1");
    if (oracle_draws < 1) throw DgpError("oracle_draws must be >= 1");
    try {
        support.check();
    } catch (const Error& e) {
        throw DgpError(e.what());
    }
}

Scenario sample_scenario(const SupportSpec& support, Rng& rng) {
    auto pick_index = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto wage = [&](const WageRange& w) {
        const auto n = static_cast<std::size_t>(std::floor((w.max - w.min) / w.step + 1e-9)) + 1;
        return w.min + static_cast<double>(pick_index(n)) * w.step;
    };
    auto level = [&](const std::vector<double>& levels) { return levels[pick_index(levels.size())]; };
    Scenario x;
    x.wage_pub = wage(support.wage_pub);
    x.wage_priv = wage(support.wage_priv);
    x.employer_pub = support.employer_pub[pick_index(support.employer_pub.size())];
    x.employer_priv = support.employer_priv[pick_index(support.employer_priv.size())];
    x.hours_pub = level(support.hours_pub);
    x.hours_priv = level(support.hours_priv);
    x.layoff_pub = level(support.layoff_pub);
    x.layoff_priv = level(support.layoff_priv);
    x.promo_pub = level(support.promo_pub);
    x.promo_priv = level(support.promo_priv);
    return x;
}

Eta draw_eta(const DgpConfig& cfg, std::uint64_t seed, std::uint64_t index) {
    Rng rng = make_rng(seed, index);
    Eta e;
    e.alpha = cfg.alpha.draw(rng);
    e.beta = cfg.beta.draw(rng);
    e.rho = cfg.rho.draw(rng);
    e.theta = cfg.taste.draw(rng);
    return e;
}

PopulationDraw draw_population(const DgpConfig& cfg, std::uint64_t seed) {
    cfg.check();
    PopulationDraw pop;
    pop.seed = seed;
    pop.eta.resize(cfg.respondents);
    for (std::size_t i = 0; i < cfg.respondents; ++i) pop.eta[i] = draw_eta(cfg, seed, i);
    return pop;
}

namespace {

void require_positive_wages(const Scenario& x) {
    if (!(x.wage_pub > 0 && x.wage_priv > 0)) {
        std::ostringstream msg;
        msg << "wages must be positive (y0=" << x.wage_option0() << ", y1=" << x.wage_option1()
            << ")";
        throw DgpError(msg.str());
    }
}

double loading_sum(const std::map<Attribute, double>& loadings, const Scenario& x) {
    double sum = 0.0;
    for (const auto& [attr, v] : loadings) sum += v * attribute_value(x, attr);
    return sum;
}

// gaussian_linear: S | eta ~ N(center, scale^2).
struct GaussBelief {
    double center;
    double scale;
};

GaussBelief gauss_belief(const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    const double wage_weight = 1.0 + loading_sum(cfg.lambda, x);
    if (!(wage_weight > 0)) throw DgpError("amenity weight 1 + lambda'z must be positive");
    const double k = eta.k() / wage_weight;
    double mean = cfg.mu_a + eta.theta;
    for (const auto& [attr, g] : cfg.gamma) {
        const auto kap = cfg.kappa.find(attr);
        const double scale = 1.0 + (kap == cfg.kappa.end() ? 0.0 : kap->second * eta.theta);
        mean += g * scale * attribute_value(x, attr);
    }
    const double sd = std::max(cfg.sigma_a + cfg.nu * eta.theta, cfg.sigma_floor);
    return {x.wage_option1() - x.wage_option0() + k * mean, k * sd};
}

// Box-Cox transform; log at beta = 0.
double boxcox(double v, double beta) {
    return beta == 0.0 ? std::log(v) : std::expm1(beta * std::log(v)) / beta;
}

// log of the inverse Box-Cox transform. Returns +inf when c is above the
// range of the transform, -inf when below.
double log_inverse_boxcox(double c, double beta) {
    if (beta == 0.0) return c;
    const double base = 1.0 + beta * c;
    if (base <= 0.0)
        return beta > 0 ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
    return std::log(base) / beta;
}

struct CesBelief {
    double mean0, sd0, mean1, sd1, rho;
};

CesBelief ces_belief(const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    return {cfg.ces_m0, cfg.ces_s0, cfg.ces_m1 + eta.theta + loading_sum(cfg.gamma, x),
            cfg.ces_s1, eta.rho};
}

// Pr(log A >= t) for log A ~ N(mean, sd^2).
double upper_tail(double t, double mean, double sd) {
    if (sd > 0) return normal_cdf((mean - t) / sd);
    return mean >= t ? 1.0 : 0.0;
}

// Pr(choose option 1): g(a1) - g(a0) >= (g(y0) - g(y1)) / k, integrating
// over log a0 with the conditional law of log a1.
double ces_choice_probability(double y0, double y1, const Eta& eta, const DgpConfig& cfg,
                              const CesBelief& b) {
    const double beta = eta.beta;
    const double k = eta.k();
    const double gap = (boxcox(y0, beta) - boxcox(y1, beta)) / k;
    const double cond_sd = b.sd0 > 0 ? b.sd1 * std::sqrt(1.0 - b.rho * b.rho) : b.sd1;
    const auto& rule = gauss_hermite(b.sd0 > 0 ? cfg.quadrature_nodes : 1);
    double total = 0.0;
    for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
        const double u0 = b.mean0 + b.sd0 * rule.nodes[n];
        const double mean1 = b.sd0 > 0 ? b.mean1 + b.rho * b.sd1 * rule.nodes[n] : b.mean1;
        double p;
        if (cond_sd > 0) {
            const double t = log_inverse_boxcox(boxcox(std::exp(u0), beta) + gap, beta);
            p = upper_tail(t, mean1, cond_sd);
        } else {
            p = boxcox(std::exp(mean1), beta) - boxcox(std::exp(u0), beta) >= gap ? 1.0 : 0.0;
        }
        total += rule.weights[n] * p;
    }
    return total;
}

// Pr(S <= s) conditioning on log a1: g(a0) >= g(a1) - (g(y0+s) - g(y1)) / k.
double ces_cdf(double s, const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    const double y0s = x.wage_option0() + s;
    if (y0s <= 0.0) return 0.0;
    const CesBelief b = ces_belief(x, eta, cfg);
    const double beta = eta.beta;
    const double gap = (boxcox(y0s, beta) - boxcox(x.wage_option1(), beta)) / eta.k();
    const double cond_sd = b.sd1 > 0 ? b.sd0 * std::sqrt(1.0 - b.rho * b.rho) : b.sd0;
    const auto& rule = gauss_hermite(b.sd1 > 0 ? cfg.quadrature_nodes : 1);
    double total = 0.0;
    for (std::size_t n = 0; n < rule.nodes.size(); ++n) {
        const double u1 = b.mean1 + b.sd1 * rule.nodes[n];
        const double mean0 = b.sd1 > 0 ? b.mean0 + b.rho * b.sd0 * rule.nodes[n] : b.mean0;
        double p;
        if (cond_sd > 0) {
            const double t = log_inverse_boxcox(boxcox(std::exp(u1), beta) - gap, beta);
            p = upper_tail(t, mean0, cond_sd);
        } else {
            p = boxcox(std::exp(u1), beta) - boxcox(std::exp(mean0), beta) <= gap ? 1.0 : 0.0;
        }
        total += rule.weights[n] * p;
    }
    return total;
}

}  // namespace

double stated_demand_m(const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    require_positive_wages(x);
    if (cfg.kind == DgpKind::gaussian_linear) {
        const GaussBelief b = gauss_belief(x, eta, cfg);
        return normal_cdf(b.center / b.scale);
    }
    return ces_choice_probability(x.wage_option0(), x.wage_option1(), eta, cfg,
                                  ces_belief(x, eta, cfg));
}

double belief_cdf_S(double s, const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    require_positive_wages(x);
    if (cfg.kind == DgpKind::gaussian_linear) {
        const GaussBelief b = gauss_belief(x, eta, cfg);
        return normal_cdf((s - b.center) / b.scale);
    }
    return ces_cdf(s, x, eta, cfg);
}

double belief_quantile_S(double tau, const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    if (!(tau > 0.0 && tau < 1.0)) throw DgpError("tau must lie in (0,1)");
    require_positive_wages(x);
    if (cfg.kind == DgpKind::gaussian_linear) {
        const GaussBelief b = gauss_belief(x, eta, cfg);
        return b.center + b.scale * normal_quantile(tau);
    }
    // Bisection on the belief cdf; S > -y0 whenever it is defined.
    double lo = -x.wage_option0();
    double hi = x.wage_option0();
    for (int i = 0; i < 200 && ces_cdf(hi, x, eta, cfg) < tau; ++i) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * (1.0 + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (ces_cdf(mid, x, eta, cfg) >= tau) hi = mid;
        else lo = mid;
    }
    return hi;
}

double realized_S(const Scenario& x, const Eta& eta, double a0, double a1, const DgpConfig& cfg) {
    require_positive_wages(x);
    const double y0 = x.wage_option0();
    const double y1 = x.wage_option1();
    if (cfg.kind == DgpKind::gaussian_linear) {
        const double wage_weight = 1.0 + loading_sum(cfg.lambda, x);
        return y1 - y0 + eta.k() / wage_weight * a1;
    }
    if (!(a0 > 0 && a1 > 0)) throw DgpError("amenities must be positive");
    const double beta = eta.beta;
    const double k = eta.k();
    if (beta == 0.0) return y1 * std::pow(a1 / a0, k) - y0;
    const double base = std::pow(y1, beta) + k * (std::pow(a1, beta) - std::pow(a0, beta));
    if (base <= 0.0) {
        if (!cfg.signed_power) {
            std::ostringstream msg;
            msg << "nonpositive CES base " << base << " for draw (alpha=" << eta.alpha
                << ", beta=" << beta << ", a0=" << a0 << ", a1=" << a1 << ")";
            throw DgpError(msg.str());
        }
        return -std::pow(-base, 1.0 / beta) - y0;
    }
    return std::pow(base, 1.0 / beta) - y0;
}

std::pair<double, double> draw_amenities(const Scenario& x, const Eta& eta, const DgpConfig& cfg,
                                         Rng& rng) {
    const double z0 = normal_quantile(uniform_open(rng));
    const double z1 = normal_quantile(uniform_open(rng));
    if (cfg.kind == DgpKind::gaussian_linear) {
        const GaussBelief b = gauss_belief(x, eta, cfg);
        // Amenity difference a1 - a0 such that realized_S ~ N(center, scale^2).
        const double k = eta.k() / (1.0 + loading_sum(cfg.lambda, x));
        const double net_wage = x.wage_option1() - x.wage_option0();
        return {0.0, (b.center - net_wage + b.scale * z0) / k};
    }
    const CesBelief b = ces_belief(x, eta, cfg);
    const double u0 = b.mean0 + b.sd0 * z0;
    const double u1 = b.mean1 + b.sd1 * (b.rho * z0 + std::sqrt(1.0 - b.rho * b.rho) * z1);
    return {std::exp(u0), std::exp(u1)};
}

double belief_mean_S(const Scenario& x, const Eta& eta, const DgpConfig& cfg) {
    require_positive_wages(x);
    if (cfg.kind == DgpKind::gaussian_linear) return gauss_belief(x, eta, cfg).center;
    const CesBelief b = ces_belief(x, eta, cfg);
    const auto& rule = gauss_hermite(64);
    const double c = std::sqrt(1.0 - b.rho * b.rho);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
            const double u0 = b.mean0 + b.sd0 * rule.nodes[i];
            const double u1 = b.mean1 + b.sd1 * (b.rho * rule.nodes[i] + c * rule.nodes[j]);
            total += rule.weights[i] * rule.weights[j] *
                     realized_S(x, eta, std::exp(u0), std::exp(u1), cfg);
        }
    return total;
}

Dataset simulate_survey(const PopulationDraw& pop, const DgpConfig& cfg, std::uint64_t seed) {
    cfg.check();
    const std::size_t n = pop.eta.size();
    const auto t = static_cast<std::size_t>(cfg.scenarios_per_respondent);
    std::vector<ChoiceRecord> records(n * t);
    parallel_for(n, [&](std::size_t i) {
        Rng rng = make_rng(seed, i);
        for (std::size_t j = 0; j < t; ++j) {
            ChoiceRecord& r = records[i * t + j];
            r.respondent_id = std::to_string(i + 1);
            r.scenario_index = static_cast<int>(j + 1);
            r.scenario = sample_scenario(cfg.support, rng);
            double p = stated_demand_m(r.scenario, pop.eta[i], cfg);
            if (cfg.round_p) p = std::round(p * 20.0) / 20.0;
            r.p_stated = std::clamp(p, 0.0, 1.0);
        }
    });
    return Dataset(std::move(records), cfg.support);
}

ReturnsCurve true_FQ(const DgpConfig& cfg, double tau, const std::vector<double>& s_grid,
                     const ScenarioMix& x_tilde, std::uint64_t seed) {
    if (!(tau > 0.0 && tau < 1.0)) throw DgpError("tau must lie in (0,1)");
    ReturnsCurve c = brute_force_cdf(cfg, x_tilde, s_grid, seed,
                                     [&](const Eta& e, const Scenario& x, std::size_t) {
                                         return belief_quantile_S(tau, x, e, cfg);
                                     });
    c.estimand = "FQ";
    c.parameter = tau;
    c.label = "true";
    return c;
}

ReturnsCurve true_dist_mu(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                          const std::vector<double>& y_grid, std::uint64_t seed) {
    ReturnsCurve c = brute_force_cdf(
        cfg, x_tilde, y_grid, seed,
        [&](const Eta& e, const Scenario& x, std::size_t) { return belief_mean_S(x, e, cfg); });
    c.estimand = "mu";
    c.label = "true";
    return c;
}

ReturnsCurve true_dist_iqr(const DgpConfig& cfg, const ScenarioMix& x_tilde, double tau1,
                           double tau2, const std::vector<double>& y_grid, std::uint64_t seed) {
    if (!(0.0 < tau1 && tau1 < tau2 && tau2 < 1.0)) throw DgpError("need 0 < tau1 < tau2 < 1");
    ReturnsCurve c = brute_force_cdf(cfg, x_tilde, y_grid, seed,
                                     [&](const Eta& e, const Scenario& x, std::size_t) {
                                         return belief_quantile_S(tau2, x, e, cfg) -
                                                belief_quantile_S(tau1, x, e, cfg);
                                     });
    c.estimand = "iqr";
    c.parameter = tau2 - tau1;
    c.label = "true";
    return c;
}

ReturnsCurve true_dist_qwtp(const DgpConfig& cfg, const ScenarioMix& x_tilde, Attribute h,
                            double delta, double tau, const std::vector<double>& y_grid,
                            std::uint64_t seed) {
    ReturnsCurve c = brute_force_cdf(cfg, x_tilde, y_grid, seed,
                                     [&](const Eta& e, const Scenario& x, std::size_t) {
                                         Scenario xh = x;
                                         shift_attribute(xh, h, delta);
                                         return belief_quantile_S(tau, xh, e, cfg) -
                                                belief_quantile_S(tau, x, e, cfg);
                                     });
    c.estimand = "qwtp";
    c.parameter = tau;
    c.label = "true";
    return c;
}

ReturnsCurve true_dist_mwtp(const DgpConfig& cfg, const ScenarioMix& x_tilde, Attribute h,
                            double delta, const std::vector<double>& y_grid,
                            std::uint64_t seed) {
    ReturnsCurve c = brute_force_cdf(cfg, x_tilde, y_grid, seed,
                                     [&](const Eta& e, const Scenario& x, std::size_t) {
                                         Scenario xh = x;
                                         shift_attribute(xh, h, delta);
                                         return belief_mean_S(xh, e, cfg) - belief_mean_S(x, e, cfg);
                                     });
    c.estimand = "mwtp";
    c.label = "true";
    return c;
}

double true_conditional_cdf(const DgpConfig& cfg, double p, const Scenario& x,
                            std::uint64_t seed) {
    const ReturnsCurve c = brute_force_cdf(
        cfg, {{x, 1.0}}, {p}, seed,
        [&](const Eta& e, const Scenario& s, std::size_t) { return stated_demand_m(s, e, cfg); });
    return c.values[0];
}

TruePolicyObjects true_policy_objects(const DgpConfig& cfg, const ScenarioMix& x_tilde,
                                      const std::vector<double>& tau_grid,
                                      const std::vector<double>& weights,
                                      const std::vector<double>& s_grid, std::uint64_t seed) {
    if (tau_grid.empty() || tau_grid.size() != weights.size())
        throw DgpError("tau grid and weights must be nonempty and of equal length");
    double mean_weight = 0.0;
    for (double w : weights) mean_weight += w;
    mean_weight /= static_cast<double>(weights.size());
    if (std::abs(mean_weight - 1.0) > 1e-9) throw DgpError("weights must average to 1");

    TruePolicyObjects out;
    out.fs.estimand = "FS";
    out.fs.label = "true";
    out.fs.grid = s_grid;
    out.fs.values.assign(s_grid.size(), 0.0);
    for (std::size_t t = 0; t < tau_grid.size(); ++t) {
        const ReturnsCurve fq = true_FQ(cfg, tau_grid[t], s_grid, x_tilde, seed);
        for (std::size_t j = 0; j < s_grid.size(); ++j)
            out.fs.values[j] += weights[t] * fq.values[j] / static_cast<double>(tau_grid.size());
    }
    make_monotone(out.fs);

    const std::uint64_t amenity_seed = mix_seed(seed, 0x5eedULL);
    out.realized = brute_force_cdf(cfg, x_tilde, s_grid, seed,
                                   [&](const Eta& e, const Scenario& x, std::size_t i) {
                                       Rng rng = make_rng(amenity_seed, i);
                                       const auto [a0, a1] = draw_amenities(x, e, cfg, rng);
                                       return realized_S(x, e, a0, a1, cfg);
                                   });
    out.realized.estimand = "S";
    out.realized.label = "true";
    return out;
}

}  // namespace exante
