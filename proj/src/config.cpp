#include "exante/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "exante/error.hpp"
#include "json.hpp"

namespace exante {

using json = nlohmann::json;

namespace {

// Object view that remembers which keys were read and rejects the rest.
class Obj {
public:
    Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
    }
    bool has(const std::string& k) {
        used_.insert(k);
        return j_.contains(k) && !j_.at(k).is_null();
    }
    const json& at(const std::string& k) {
        used_.insert(k);
        if (!j_.contains(k)) throw ConfigError(where_ + ": missing key '" + k + "'");
        return j_.at(k);
    }
    template <class T>
    T get(const std::string& k) {
        try {
            return at(k).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(where_ + "." + k + ": " + e.what());
        }
    }
    template <class T>
    void opt(const std::string& k, T& out) {
        if (has(k)) out = get<T>(k);
    }
    std::string path(const std::string& k) const { return where_ + "." + k; }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

template <class F>
auto wrap(const std::string& where, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

GridSpec grid_from(const json& j, const std::string& where) {
    Obj o(j, where);
    GridSpec g{o.get<double>("lo"), o.get<double>("hi"), o.get<double>("step")};
    o.finish();
    if (!(g.step > 0) || g.hi < g.lo) throw ConfigError(where + ": need lo <= hi and step > 0");
    return g;
}

json grid_to(const GridSpec& g) { return {{"lo", g.lo}, {"hi", g.hi}, {"step", g.step}}; }

WageRange wage_from(const json& j, const std::string& where) {
    Obj o(j, where);
    WageRange w{o.get<double>("min"), o.get<double>("max"), o.get<double>("step")};
    o.finish();
    return w;
}

SupportSpec support_from(const json& j, const std::string& where) {
    Obj o(j, where);
    SupportSpec s;
    if (o.has("wage_pub")) s.wage_pub = wage_from(o.at("wage_pub"), o.path("wage_pub"));
    if (o.has("wage_priv")) s.wage_priv = wage_from(o.at("wage_priv"), o.path("wage_priv"));
    if (o.has("employer_pub")) {
        s.employer_pub.clear();
        for (const auto& v : o.at("employer_pub"))
            s.employer_pub.push_back(
                wrap(where, [&] { return parse_public_employer(v.get<std::string>()); }));
    }
    if (o.has("employer_priv")) {
        s.employer_priv.clear();
        for (const auto& v : o.at("employer_priv"))
            s.employer_priv.push_back(
                wrap(where, [&] { return parse_private_employer(v.get<std::string>()); }));
    }
    o.opt("hours_pub", s.hours_pub);
    o.opt("hours_priv", s.hours_priv);
    o.opt("layoff_pub", s.layoff_pub);
    o.opt("layoff_priv", s.layoff_priv);
    o.opt("promo_pub", s.promo_pub);
    o.opt("promo_priv", s.promo_priv);
    o.finish();
    wrap(where, [&] {
        s.check();
        return 0;
    });
    return s;
}

json support_to(const SupportSpec& s) {
    auto wage = [](const WageRange& w) {
        return json{{"min", w.min}, {"max", w.max}, {"step", w.step}};
    };
    json ep = json::array(), epv = json::array();
    for (auto e : s.employer_pub) ep.push_back(to_string(e));
    for (auto e : s.employer_priv) epv.push_back(to_string(e));
    return {{"wage_pub", wage(s.wage_pub)},   {"wage_priv", wage(s.wage_priv)},
            {"employer_pub", ep},             {"employer_priv", epv},
            {"hours_pub", s.hours_pub},       {"hours_priv", s.hours_priv},
            {"layoff_pub", s.layoff_pub},     {"layoff_priv", s.layoff_priv},
            {"promo_pub", s.promo_pub},       {"promo_priv", s.promo_priv}};
}

Scenario scenario_from(const json& j, const std::string& where) {
    Obj o(j, where);
    Scenario x;
    o.opt("wage_pub", x.wage_pub);
    o.opt("wage_priv", x.wage_priv);
    if (o.has("employer_pub"))
        x.employer_pub =
            wrap(where, [&] { return parse_public_employer(o.get<std::string>("employer_pub")); });
    if (o.has("employer_priv"))
        x.employer_priv = wrap(
            where, [&] { return parse_private_employer(o.get<std::string>("employer_priv")); });
    o.opt("hours_pub", x.hours_pub);
    o.opt("hours_priv", x.hours_priv);
    o.opt("layoff_pub", x.layoff_pub);
    o.opt("layoff_priv", x.layoff_priv);
    o.opt("promo_pub", x.promo_pub);
    o.opt("promo_priv", x.promo_priv);
    o.finish();
    return x;
}

json scenario_to(const Scenario& x) {
    return {{"wage_pub", x.wage_pub},       {"wage_priv", x.wage_priv},
            {"employer_pub", to_string(x.employer_pub)},
            {"employer_priv", to_string(x.employer_priv)},
            {"hours_pub", x.hours_pub},     {"hours_priv", x.hours_priv},
            {"layoff_pub", x.layoff_pub},   {"layoff_priv", x.layoff_priv},
            {"promo_pub", x.promo_pub},     {"promo_priv", x.promo_priv}};
}

ParamDist dist_from(const json& j, const std::string& where) {
    if (j.is_number()) return ParamDist::fixed(j.get<double>());
    Obj o(j, where);
    ParamDist d;
    d.kind = wrap(where, [&] { return parse_param_kind(o.get<std::string>("kind")); });
    o.opt("a", d.a);
    o.opt("b", d.b);
    o.finish();
    return d;
}

json dist_to(const ParamDist& d) { return {{"kind", to_string(d.kind)}, {"a", d.a}, {"b", d.b}}; }

std::map<Attribute, double> loadings_from(const json& j, const std::string& where) {
    Obj o(j, where);
    std::map<Attribute, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const Attribute a = wrap(where, [&] { return parse_attribute(it.key()); });
        out[a] = o.get<double>(it.key());
    }
    o.finish();
    return out;
}

json loadings_to(const std::map<Attribute, double>& m) {
    json j = json::object();
    for (const auto& [a, v] : m) j[to_string(a)] = v;
    return j;
}

DgpConfig dgp_from(const json& j, const std::string& where) {
    Obj o(j, where);
    DgpConfig c;
    if (o.has("kind")) c.kind = wrap(where, [&] { return parse_dgp_kind(o.get<std::string>("kind")); });
    if (o.has("alpha")) c.alpha = dist_from(o.at("alpha"), o.path("alpha"));
    if (o.has("beta")) c.beta = dist_from(o.at("beta"), o.path("beta"));
    if (o.has("rho")) c.rho = dist_from(o.at("rho"), o.path("rho"));
    if (o.has("taste")) c.taste = dist_from(o.at("taste"), o.path("taste"));
    o.opt("mu_a", c.mu_a);
    o.opt("sigma_a", c.sigma_a);
    o.opt("nu", c.nu);
    o.opt("sigma_floor", c.sigma_floor);
    if (o.has("gamma")) c.gamma = loadings_from(o.at("gamma"), o.path("gamma"));
    if (o.has("kappa")) c.kappa = loadings_from(o.at("kappa"), o.path("kappa"));
    if (o.has("lambda")) c.lambda = loadings_from(o.at("lambda"), o.path("lambda"));
    o.opt("ces_m0", c.ces_m0);
    o.opt("ces_s0", c.ces_s0);
    o.opt("ces_m1", c.ces_m1);
    o.opt("ces_s1", c.ces_s1);
    o.opt("signed_power", c.signed_power);
    o.opt("quadrature_nodes", c.quadrature_nodes);
    o.opt("scenarios_per_respondent", c.scenarios_per_respondent);
    o.opt("respondents", c.respondents);
    o.opt("round_p", c.round_p);
    o.opt("oracle_draws", c.oracle_draws);
    if (o.has("support")) c.support = support_from(o.at("support"), o.path("support"));
    o.finish();
    return c;
}

json dgp_to(const DgpConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"alpha", dist_to(c.alpha)},
            {"beta", dist_to(c.beta)},
            {"rho", dist_to(c.rho)},
            {"taste", dist_to(c.taste)},
            {"mu_a", c.mu_a},
            {"sigma_a", c.sigma_a},
            {"nu", c.nu},
            {"sigma_floor", c.sigma_floor},
            {"gamma", loadings_to(c.gamma)},
            {"kappa", loadings_to(c.kappa)},
            {"lambda", loadings_to(c.lambda)},
            {"ces_m0", c.ces_m0},
            {"ces_s0", c.ces_s0},
            {"ces_m1", c.ces_m1},
            {"ces_s1", c.ces_s1},
            {"signed_power", c.signed_power},
            {"quadrature_nodes", c.quadrature_nodes},
            {"scenarios_per_respondent", c.scenarios_per_respondent},
            {"respondents", c.respondents},
            {"round_p", c.round_p},
            {"oracle_draws", c.oracle_draws}};
}

std::string to_string(ElasticityConvention c) {
    return c == ElasticityConvention::proportional ? "proportional" : "percentage_point";
}

ElasticityConvention parse_convention(const std::string& s) {
    if (s == "percentage_point") return ElasticityConvention::percentage_point;
    if (s == "proportional") return ElasticityConvention::proportional;
    throw ConfigError("unknown elasticity convention '" + s + "'");
}

BandKind parse_band_kind(const std::string& s) {
    if (s == "pointwise") return BandKind::pointwise;
    if (s == "uniform") return BandKind::uniform;
    throw ConfigError("unknown band kind '" + s + "'");
}

}  // namespace

ThresholdGrid ThresholdSpec::build(const Dataset& d) const {
    if (kind == "uniform") return ThresholdGrid::uniform(n);
    if (kind == "quantiles") return ThresholdGrid::from_quantiles(d);
    if (kind == "list") {
        ThresholdGrid g{p};
        g.check();
        return g;
    }
    throw ConfigError("unknown threshold kind '" + kind + "'");
}

std::filesystem::path RunConfig::resolved_dataset() const {
    return dataset_path.empty() ? out_dir / "dataset.csv" : dataset_path;
}

std::filesystem::path RunConfig::resolved_model() const {
    return model_path.empty() ? out_dir / "model.json" : model_path;
}

SGrid RunConfig::s_grid() const {
    const SupportSpec& sup = support ? *support : dgp.support;
    if (returns.s_grid) return SGrid::uniform(sup, returns.s_grid->lo, returns.s_grid->hi,
                                              returns.s_grid->step);
    if (x_tilde.empty()) throw ConfigError("x_tilde is empty");
    const double y0 = x_tilde.front().x.wage_option0();
    const double step = returns.s_step;
    const double lo = std::ceil((sup.wage_priv.min - y0) / step) * step;
    const double hi = std::floor((sup.wage_priv.max - y0) / step) * step;
    return SGrid::uniform(sup, std::min(lo, 0.0), std::max(hi, 0.0), step);
}

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Obj o(j, "config");
    RunConfig c;
    o.opt("seed", c.seed);
    if (o.has("out_dir")) c.out_dir = o.get<std::string>("out_dir");
    if (o.has("dataset")) {
        Obj d(o.at("dataset"), "config.dataset");
        if (d.has("path")) c.dataset_path = d.get<std::string>("path");
        if (d.has("columns")) c.schema.columns = d.get<std::map<std::string, std::string>>("columns");
        d.opt("wage_divisor", c.schema.wage_divisor);
        d.finish();
    }
    if (o.has("model_path")) c.model_path = o.get<std::string>("model_path");
    if (o.has("support")) c.support = support_from(o.at("support"), "config.support");
    if (o.has("dgp")) c.dgp = dgp_from(o.at("dgp"), "config.dgp");
    if (c.support) c.dgp.support = *c.support;
    o.opt("truth_seed", c.truth_seed);

    if (o.has("estimator")) {
        Obj e(o.at("estimator"), "config.estimator");
        if (e.has("design"))
            c.design = wrap("config.estimator.design",
                            [&] { return DesignMap(e.get<std::vector<std::string>>("design")); });
        if (e.has("thresholds")) {
            Obj t(e.at("thresholds"), "config.estimator.thresholds");
            t.opt("kind", c.thresholds.kind);
            t.opt("n", c.thresholds.n);
            t.opt("p", c.thresholds.p);
            t.finish();
        }
        e.opt("ridge", c.ridge);
        e.finish();
    }

    if (o.has("x_tilde")) {
        const json& xs = o.at("x_tilde");
        if (!xs.is_array() || xs.empty()) throw ConfigError("config.x_tilde must be a nonempty array");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const std::string where = "config.x_tilde[" + std::to_string(i) + "]";
            Obj w(xs[i], where);
            WeightedScenario ws;
            ws.x = scenario_from(w.at("scenario"), where + ".scenario");
            w.opt("mass", ws.mass);
            w.finish();
            if (!(ws.mass > 0)) throw ConfigError(where + ": mass must be positive");
            c.x_tilde.push_back(ws);
        }
    } else {
        c.x_tilde.push_back({Scenario{}, 1.0});
    }

    if (o.has("returns")) {
        Obj r(o.at("returns"), "config.returns");
        if (r.has("s_grid")) c.returns.s_grid = grid_from(r.at("s_grid"), "config.returns.s_grid");
        r.opt("s_step", c.returns.s_step);
        r.opt("taus", c.returns.taus);
        if (r.has("mu_grid")) c.returns.mu_grid = grid_from(r.at("mu_grid"), "config.returns.mu_grid");
        if (r.has("iqr_grid"))
            c.returns.iqr_grid = grid_from(r.at("iqr_grid"), "config.returns.iqr_grid");
        r.opt("iqr_tau1", c.returns.iqr_tau1);
        r.opt("iqr_tau2", c.returns.iqr_tau2);
        r.opt("a_points", c.returns.a_points);
        if (r.has("shift")) {
            Obj h(r.at("shift"), "config.returns.shift");
            AttributeShift s;
            s.attribute = wrap("config.returns.shift",
                               [&] { return parse_attribute(h.get<std::string>("attribute")); });
            s.delta = h.get<double>("delta");
            h.finish();
            c.returns.shift = s;
        }
        r.opt("qwtp_tau", c.returns.qwtp_tau);
        if (r.has("wtp_grid"))
            c.returns.wtp_grid = grid_from(r.at("wtp_grid"), "config.returns.wtp_grid");
        if (r.has("copula"))
            c.returns.copula = wrap("config.returns.copula",
                                    [&] { return parse_copula_kind(r.get<std::string>("copula")); });
        r.opt("copula_bins", c.returns.copula_bins);
        r.finish();
    }

    o.opt("bootstrap", c.bootstrap);
    if (o.has("band")) {
        Obj b(o.at("band"), "config.band");
        b.opt("level", c.band.level);
        if (b.has("kind")) c.band.kind = parse_band_kind(b.get<std::string>("kind"));
        b.finish();
    }

    if (o.has("policy")) {
        Obj p(o.at("policy"), "config.policy");
        p.opt("tau_grid", c.policy.tau_grid);
        if (p.has("schemes")) {
            c.policy.schemes.clear();
            for (const auto& s : p.at("schemes")) {
                Obj so(s, "config.policy.schemes[]");
                SchemeSpec spec;
                spec.name = so.get<std::string>("name");
                if (so.has("kind"))
                    spec.kind = wrap("config.policy.schemes",
                                     [&] { return parse_weight_kind(so.get<std::string>("kind")); });
                so.opt("a", spec.a);
                so.opt("b", spec.b);
                so.finish();
                c.policy.schemes.push_back(spec);
            }
        }
        if (p.has("x_grid")) c.policy.x_grid = grid_from(p.at("x_grid"), "config.policy.x_grid");
        if (p.has("convention")) c.policy.convention = parse_convention(p.get<std::string>("convention"));
        p.finish();
    }

    if (o.has("selftest")) {
        Obj s(o.at("selftest"), "config.selftest");
        s.opt("datasets", c.selftest_datasets);
        s.opt("replicates", c.selftest_replicates);
        s.finish();
    }
    o.finish();

    if (c.bootstrap < 0) throw ConfigError("bootstrap must be nonnegative");
    wrap("config.band", [&] {
        c.band.check();
        return 0;
    });
    wrap("config.dgp", [&] {
        c.dgp.check();
        return 0;
    });
    for (double t : c.returns.taus)
        if (!(t > 0 && t < 1)) throw ConfigError("config.returns.taus must lie in (0,1)");
    c.canonical = config_to_json(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
    json j;
    // out_dir is left out: it says where artifacts go, not what they contain.
    j["seed"] = c.seed;
    j["dataset"] = {{"path", c.dataset_path.generic_string()},
                    {"columns", c.schema.columns},
                    {"wage_divisor", c.schema.wage_divisor}};
    j["model_path"] = c.model_path.generic_string();
    if (c.support) j["support"] = support_to(*c.support);
    j["dgp"] = dgp_to(c.dgp);
    j["dgp"]["support"] = support_to(c.dgp.support);
    j["truth_seed"] = c.truth_seed;
    j["estimator"] = {{"design", c.design.features()},
                      {"thresholds", {{"kind", c.thresholds.kind}, {"n", c.thresholds.n},
                                      {"p", c.thresholds.p}}},
                      {"ridge", c.ridge}};
    json xs = json::array();
    for (const auto& w : c.x_tilde) xs.push_back({{"scenario", scenario_to(w.x)}, {"mass", w.mass}});
    j["x_tilde"] = xs;
    json r;
    if (c.returns.s_grid) r["s_grid"] = grid_to(*c.returns.s_grid);
    r["s_step"] = c.returns.s_step;
    r["taus"] = c.returns.taus;
    if (c.returns.mu_grid) r["mu_grid"] = grid_to(*c.returns.mu_grid);
    if (c.returns.iqr_grid) r["iqr_grid"] = grid_to(*c.returns.iqr_grid);
    r["iqr_tau1"] = c.returns.iqr_tau1;
    r["iqr_tau2"] = c.returns.iqr_tau2;
    r["a_points"] = c.returns.a_points;
    if (c.returns.shift)
        r["shift"] = {{"attribute", to_string(c.returns.shift->attribute)},
                      {"delta", c.returns.shift->delta}};
    r["qwtp_tau"] = c.returns.qwtp_tau;
    if (c.returns.wtp_grid) r["wtp_grid"] = grid_to(*c.returns.wtp_grid);
    r["copula"] = to_string(c.returns.copula);
    r["copula_bins"] = c.returns.copula_bins;
    j["returns"] = r;
    j["bootstrap"] = c.bootstrap;
    j["band"] = {{"level", c.band.level}, {"kind", to_string(c.band.kind)}};
    json schemes = json::array();
    for (const auto& s : c.policy.schemes)
        schemes.push_back({{"name", s.name}, {"kind", to_string(s.kind)}, {"a", s.a}, {"b", s.b}});
    j["policy"] = {{"tau_grid", c.policy.tau_grid},
                   {"schemes", schemes},
                   {"x_grid", grid_to(c.policy.x_grid)},
                   {"convention", to_string(c.policy.convention)}};
    j["selftest"] = {{"datasets", c.selftest_datasets}, {"replicates", c.selftest_replicates}};
    return j.dump(2);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw ConfigError("sha256 failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) {
    return sha256_hex(cfg.canonical.empty() ? config_to_json(cfg) : cfg.canonical);
}

Scenario scenario_from_json_text(const std::string& text) {
    try {
        return scenario_from(json::parse(text), "scenario");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
    }
}

}  // namespace exante
