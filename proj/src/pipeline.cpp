#include "exante/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "exante/acceptance.hpp"
#include "exante/error.hpp"
#include "json.hpp"

namespace exante {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string num(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + p.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Writer {
public:
    Writer(const RunConfig& cfg, std::ostream& log)
        : dir_(cfg.out_dir), hash_(config_hash(cfg)), log_(log) {
        fs::create_directories(dir_);
    }

    const std::string& hash() const { return hash_; }
    std::string header() const { return "config_hash=" + hash_; }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + p.string() + "'");
        out << content;
        out.close();
        if (!out) throw ConfigError("write failed for '" + p.string() + "'");
        result.artifacts.push_back({name, sha256_hex(content)});
        log_ << "wrote " << p.generic_string() << '\n';
    }

    void add(const Artifact& a) { result.artifacts.push_back(a); }

    RunResult finish() {
        std::map<std::string, std::string> files;
        for (const auto& a : read_manifest(dir_)) files[a.path] = a.sha256;
        for (const auto& a : result.artifacts) files[a.path] = a.sha256;
        json j;
        j["config_hash"] = hash_;
        j["files"] = files;
        const fs::path p = dir_ / "manifest.json";
        std::ofstream out(p, std::ios::binary);
        out << j.dump(2) << '\n';
        log_ << "wrote " << p.generic_string() << '\n';
        return result;
    }

    RunResult result;

private:
    fs::path dir_;
    std::string hash_;
    std::ostream& log_;
};

struct Grids {
    SGrid s;
    std::vector<double> mu;
    std::vector<double> iqr;
    std::vector<double> wtp;
};

Grids grids_for(const RunConfig& cfg) {
    Grids g{cfg.s_grid(), {}, {}, {}};
    g.s.check();
    const double lo = g.s.s.front();
    const double hi = g.s.s.back();
    const double step = cfg.returns.s_step;
    const double half = std::max(step, std::floor((hi - lo) / 2.0 / step) * step);
    g.mu = cfg.returns.mu_grid ? cfg.returns.mu_grid->values() : uniform_grid(lo, hi, step);
    g.iqr = cfg.returns.iqr_grid ? cfg.returns.iqr_grid->values() : uniform_grid(0.0, half, step);
    g.wtp = cfg.returns.wtp_grid ? cfg.returns.wtp_grid->values() : uniform_grid(-half, half, step);
    return g;
}

std::string truth_csv(const std::vector<ReturnsCurve>& curves, const std::string& header) {
    std::ostringstream out;
    out << "# " << header << '\n';
    out << "estimand,parameter,s,value\n";
    for (const auto& c : curves)
        for (std::size_t j = 0; j < c.grid.size(); ++j)
            out << c.estimand << ',' << num(c.parameter) << ',' << num(c.grid[j]) << ','
                << num(c.values[j]) << '\n';
    return out.str();
}

Dataset load_input(const RunConfig& cfg) {
    const fs::path p = cfg.resolved_dataset();
    if (!fs::exists(p))
        throw ConfigError("dataset '" + p.generic_string() + "' not found; run `exante simulate` "
                          "or set dataset.path");
    return load_dataset(p, cfg.schema, cfg.support);
}

DRModel load_model(const RunConfig& cfg) {
    const fs::path p = cfg.resolved_model();
    if (!fs::exists(p))
        throw ConfigError("fit required: no fitted model at '" + p.generic_string() +
                          "'; run `exante fit` first");
    return model_from_json(read_file(p));
}

FitOptions fit_options(const RunConfig& cfg) {
    FitOptions o;
    o.ridge = cfg.ridge;
    return o;
}

double baseline_wage(const ScenarioMix& mix) {
    double num_w = 0.0, mass = 0.0;
    for (const auto& w : mix) {
        num_w += w.mass * w.x.wage_option0();
        mass += w.mass;
    }
    return num_w / mass;
}

// Point estimates of every configured estimand, in a fixed order.
std::vector<ReturnsCurve> estimate_curves(const DRModel& m, const RunConfig& cfg, const Grids& g,
                                          const CopulaModel* copula) {
    std::vector<ReturnsCurve> out;
    for (double tau : cfg.returns.taus) out.push_back(fq_curve(m, tau, g.s, cfg.x_tilde));
    out.push_back(dist_mu(m, cfg.x_tilde, g.mu, g.s, cfg.returns.a_points));
    out.push_back(dist_iqr(m, cfg.x_tilde, cfg.returns.iqr_tau1, cfg.returns.iqr_tau2, g.iqr, g.s,
                           cfg.returns.a_points));
    if (cfg.returns.shift && copula) {
        out.push_back(dist_qwtp(m, *copula, cfg.x_tilde, *cfg.returns.shift, cfg.returns.qwtp_tau,
                                g.wtp, g.s));
        out.push_back(dist_mwtp(m, *copula, cfg.x_tilde, *cfg.returns.shift, g.wtp, g.s));
    }
    return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "fit", "curves", "policy", "selftest"};
    return names;
}

std::vector<Artifact> read_manifest(const fs::path& out_dir) {
    const fs::path p = out_dir / "manifest.json";
    std::vector<Artifact> out;
    if (!fs::exists(p)) return out;
    try {
        const json j = json::parse(read_file(p));
        for (auto it = j.at("files").begin(); it != j.at("files").end(); ++it)
            out.push_back({it.key(), it.value().get<std::string>()});
    } catch (const json::exception& e) {
        throw ConfigError("malformed manifest '" + p.generic_string() + "': " + e.what());
    }
    return out;
}

RunResult run_simulate(const RunConfig& cfg, std::ostream& log) {
    Writer w(cfg, log);
    const PopulationDraw pop = draw_population(cfg.dgp, cfg.seed);
    const Dataset d = simulate_survey(pop, cfg.dgp, mix_seed(cfg.seed, 1));
    w.write("dataset.csv", dataset_to_csv(d, {w.header()}));

    const Grids g = grids_for(cfg);
    std::vector<ReturnsCurve> truth;
    for (double tau : cfg.returns.taus)
        truth.push_back(true_FQ(cfg.dgp, tau, g.s.s, cfg.x_tilde, cfg.truth_seed));
    truth.push_back(true_dist_mu(cfg.dgp, cfg.x_tilde, g.mu, cfg.truth_seed));
    truth.push_back(true_dist_iqr(cfg.dgp, cfg.x_tilde, cfg.returns.iqr_tau1, cfg.returns.iqr_tau2,
                                  g.iqr, cfg.truth_seed));
    if (cfg.returns.shift) {
        const auto& h = *cfg.returns.shift;
        truth.push_back(true_dist_qwtp(cfg.dgp, cfg.x_tilde, h.attribute, h.delta,
                                       cfg.returns.qwtp_tau, g.wtp, cfg.truth_seed));
        truth.push_back(
            true_dist_mwtp(cfg.dgp, cfg.x_tilde, h.attribute, h.delta, g.wtp, cfg.truth_seed));
    }
    for (const auto& s : cfg.policy.schemes) {
        const WeightScheme ws = make_weights(s.kind, s.a, s.b, cfg.policy.tau_grid, s.name);
        TruePolicyObjects t =
            true_policy_objects(cfg.dgp, cfg.x_tilde, ws.tau, ws.omega, g.s.s, cfg.truth_seed);
        t.fs.estimand = "FS_" + s.name;
        truth.push_back(t.fs);
        if (&s == &cfg.policy.schemes.front()) {
            t.realized.estimand = "realized_S";
            truth.push_back(t.realized);
        }
    }
    w.write("truth_curves.csv", truth_csv(truth, w.header()));
    return w.finish();
}

RunResult run_fit(const RunConfig& cfg, std::ostream& log) {
    Writer w(cfg, log);
    const Dataset d = load_input(cfg);
    const ValidationReport v = validate(d);
    json vj = {{"config_hash", w.hash()},
               {"records", v.records},
               {"respondents", v.respondents},
               {"out_of_support", v.out_of_support},
               {"duplicate_keys", v.duplicate_keys},
               {"heaping_share", v.heaping_share},
               {"single_scenario_respondents", v.single_scenario_respondents},
               {"paired_count", v.paired_count},
               {"wtp_gate_open", v.wtp_gate_open()}};
    w.write("validation.json", vj.dump(2) + "\n");

    const DRModel m = fit_dr(d, cfg.thresholds.build(d), cfg.design, {}, fit_options(cfg));
    json mj = json::parse(model_to_json(m));
    mj["config_hash"] = w.hash();
    w.write("model.json", mj.dump(1) + "\n");
    w.write("diagnostics.csv", diagnostics_csv(m, {w.header()}));
    return w.finish();
}

RunResult run_curves(const RunConfig& cfg, std::ostream& log) {
    const DRModel m = load_model(cfg);
    Writer w(cfg, log);
    const Dataset d = load_input(cfg);
    const Grids g = grids_for(cfg);

    std::optional<CopulaModel> copula;
    std::vector<std::string> notes;
    if (cfg.returns.shift) {
        const CopulaKind kind = cfg.returns.copula;
        if (kind == CopulaKind::independence || kind == CopulaKind::comonotone) {
            copula = fit_copula({}, kind, cfg.returns.copula_bins, cfg.returns.a_points);
        } else {
            try {
                copula = fit_copula(pseudo_ranks(m, d), kind, cfg.returns.copula_bins,
                                    cfg.returns.a_points);
            } catch (const ReturnsError& e) {
                notes.push_back(std::string("qWTP/mWTP skipped: ") + e.what());
                log << "note: " << notes.back() << '\n';
            }
        }
    }
    const CopulaModel* cop = copula ? &*copula : nullptr;
    std::vector<ReturnsCurve> point = estimate_curves(m, cfg, g, cop);

    if (cfg.bootstrap > 0) {
        BootstrapOptions bo;
        bo.fit = fit_options(cfg);
        bo.main_fit = &m;
        const BootstrapResult br = bootstrap_fits(d, m.grid(), m.design(), cfg.bootstrap,
                                                  mix_seed(cfg.seed, 0xb0075742), bo);
        for (const auto& [b, why] : br.dropped)
            log << "note: bootstrap replicate " << b << " dropped: " << why << '\n';
        std::vector<std::vector<ReturnsCurve>> draws(point.size());
        for (const auto& fit : br.fits) {
            auto curves = estimate_curves(fit, cfg, g, cop);
            for (std::size_t c = 0; c < curves.size(); ++c) draws[c].push_back(std::move(curves[c]));
        }
        for (std::size_t c = 0; c < point.size(); ++c)
            point[c] = add_band(point[c], draws[c], cfg.band);
    }
    for (auto& c : point) c.notes.insert(c.notes.end(), notes.begin(), notes.end());

    auto select = [&](auto pred) {
        std::vector<ReturnsCurve> out;
        for (const auto& c : point)
            if (pred(c)) out.push_back(c);
        return out;
    };
    std::vector<std::string> header{w.header(), "bootstrap=" + std::to_string(cfg.bootstrap)};
    w.write("fq_curves.csv",
            curves_to_csv(select([](const ReturnsCurve& c) { return c.estimand == "FQ"; }), header));
    w.write("mu_curve.csv",
            curves_to_csv(select([](const ReturnsCurve& c) { return c.estimand == "mu"; }), header));
    w.write("iqr_curve.csv", curves_to_csv(
                                 select([](const ReturnsCurve& c) { return c.estimand == "iqr"; }),
                                 header));
    if (cop) {
        w.write("wtp_curves.csv", curves_to_csv(select([](const ReturnsCurve& c) {
                                                    return c.estimand == "qwtp" ||
                                                           c.estimand == "mwtp";
                                                }),
                                                header));
    }
    return w.finish();
}

RunResult run_policy(const RunConfig& cfg, std::ostream& log) {
    const DRModel m = load_model(cfg);
    Writer w(cfg, log);
    const SGrid s = cfg.s_grid();
    std::vector<ReturnsCurve> fq;
    for (double tau : cfg.policy.tau_grid) fq.push_back(fq_curve(m, tau, s, cfg.x_tilde));
    const double wbar = baseline_wage(cfg.x_tilde);
    const std::vector<double> xs = cfg.policy.x_grid.values();

    std::vector<ReturnsCurve> fs_curves;
    std::vector<CostTable> tables;
    std::ostringstream el;
    el << "# " << w.header() << '\n';
    el << "scheme,alpha,beta,f0,convention,elasticity\n";
    for (const auto& spec : cfg.policy.schemes) {
        const WeightScheme ws = make_weights(spec.kind, spec.a, spec.b, cfg.policy.tau_grid, spec.name);
        ReturnsCurve f = predict_fs(fq, ws);
        f.estimand = "FS_" + spec.name;
        const CostTable t = transfer_cost_curve(f, xs, wbar, spec.name);
        el << spec.name << ',' << num(spec.a) << ',' << num(spec.b) << ',' << num(t.f0) << ','
           << (cfg.policy.convention == ElasticityConvention::proportional ? "proportional"
                                                                            : "percentage_point")
           << ',' << num(cost_elasticity(t, cfg.policy.convention)) << '\n';
        fs_curves.push_back(std::move(f));
        tables.push_back(t);
    }
    w.write("fs_curves.csv", curves_to_csv(fs_curves, {w.header()}));
    w.write("cost_tables.csv",
            cost_tables_csv(tables, {w.header(), "baseline_wage=" + num(wbar)}));
    w.write("elasticities.csv", el.str());
    return w.finish();
}

RunResult run_selftest(const RunConfig& cfg, std::ostream& log) {
    Writer w(cfg, log);
    AcceptanceOptions opt;
    opt.seed = cfg.seed;
    opt.coverage_datasets = cfg.selftest_datasets;
    opt.coverage_replicates = cfg.selftest_replicates;
    opt.coverage_time_limit = 180.0;
    // 10 datasets at true coverage 0.8 give <= 5 covered with probability 3.3%.
    opt.coverage_min_rate =
        opt.coverage_datasets >= 50 ? 0.8 : smoke_coverage_rate(opt.coverage_datasets);
    const auto results = run_acceptance(opt, {1, 2, 3, 4, 5, 6, 7}, log);
    std::ostringstream rep;
    rep << "# " << w.header() << '\n';
    rep << "id,name,pass,detail\n";
    bool all = true;
    for (const auto& r : results) {
        // Details hold only deterministic quantities; timings go to the log.
        rep << r.id << ',' << r.name << ',' << (r.pass ? "pass" : "fail") << ",\"" << r.detail
            << "\"\n";
        all = all && r.pass;
    }
    w.write("selftest_report.csv", rep.str());

    RunConfig sub = cfg;
    sub.out_dir = cfg.out_dir / "pipeline";
    sub.dataset_path.clear();
    sub.model_path.clear();
    sub.dgp.respondents = std::min<std::size_t>(sub.dgp.respondents, 1000);
    sub.dgp.oracle_draws = std::min<std::size_t>(sub.dgp.oracle_draws, 20000);
    sub.bootstrap = sub.bootstrap > 0 ? 50 : 0;
    sub.canonical = config_to_json(sub);
    fs::remove(sub.out_dir / "manifest.json");
    for (auto* step : {&run_simulate, &run_fit, &run_curves, &run_policy}) {
        const RunResult r = (*step)(sub, log);
        for (const auto& a : r.artifacts) w.add({"pipeline/" + a.path, a.sha256});
    }
    log << (all ? "selftest: all criteria passed\n" : "selftest: FAILED\n");
    RunResult out = w.finish();
    out.exit_code = all ? 0 : 1;
    return out;
}

RunResult run_command(const std::string& command, const RunConfig& cfg, std::ostream& log) {
    if (command == "simulate") return run_simulate(cfg, log);
    if (command == "fit") return run_fit(cfg, log);
    if (command == "curves") return run_curves(cfg, log);
    if (command == "policy") return run_policy(cfg, log);
    if (command == "selftest") return run_selftest(cfg, log);
    throw ConfigError("unknown command '" + command +
                      "'; usage: exante <simulate|fit|curves|policy|selftest> --config <path>");
}

}  // namespace exante
