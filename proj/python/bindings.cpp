#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "exante/acceptance.hpp"
#include "exante/config.hpp"
#include "exante/dgp.hpp"
#include "exante/dr.hpp"
#include "exante/error.hpp"
#include "exante/pipeline.hpp"
#include "exante/policy.hpp"
#include "exante/returns.hpp"

namespace py = pybind11;
using namespace exante;

namespace {

py::dict curve_dict(const ReturnsCurve& c) {
    py::dict d;
    d["estimand"] = c.estimand;
    d["parameter"] = c.parameter;
    d["label"] = c.label;
    d["grid"] = c.grid;
    d["values"] = c.values;
    d["extrapolated"] = c.extrapolated;
    if (c.band) {
        d["lower"] = c.band->lower;
        d["upper"] = c.band->upper;
    }
    d["notes"] = c.notes;
    return d;
}

ScenarioMix mix_from(const std::vector<std::pair<std::string, double>>& xs) {
    ScenarioMix mix;
    for (const auto& [text, mass] : xs) mix.push_back({scenario_from_json_text(text), mass});
    return mix;
}

}  // namespace

PYBIND11_MODULE(_exante, m) {
    m.doc() = "Core bindings; see the exante package for the Python-facing API.";

    static py::exception<Error> base(m, "ExanteError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(base.ptr(), e.what());
        }
    });

    py::class_<Dataset>(m, "Dataset")
        .def("__len__", &Dataset::size)
        .def_property_readonly("respondent_count", &Dataset::respondent_count)
        .def("records", [](const Dataset& d) {
            py::list out;
            for (const auto& r : d.records())
                out.append(py::make_tuple(r.respondent_id, r.scenario_index, r.p_stated,
                                          r.scenario.wage_pub, r.scenario.wage_priv));
            return out;
        })
        .def("validate", [](const Dataset& d) {
            const ValidationReport v = validate(d);
            py::dict out;
            out["records"] = v.records;
            out["respondents"] = v.respondents;
            out["out_of_support"] = v.out_of_support;
            out["duplicate_keys"] = v.duplicate_keys;
            out["heaping_share"] = v.heaping_share;
            out["single_scenario_respondents"] = v.single_scenario_respondents;
            out["paired_count"] = v.paired_count;
            return out;
        });

    m.def("load_dataset", [](const std::filesystem::path& p) { return load_dataset(p); },
          py::arg("path"));

    m.def(
        "simulate_from_config",
        [](const std::string& config_json, std::uint64_t seed) {
            const RunConfig c = parse_config(config_json);
            return simulate_survey(draw_population(c.dgp, seed), c.dgp, mix_seed(seed, 1));
        },
        py::arg("config_json"), py::arg("seed"));

    py::class_<DRModel>(m, "DRModel")
        .def_property_readonly("thresholds", [](const DRModel& dm) { return dm.grid().p; })
        .def_property_readonly("features", [](const DRModel& dm) { return dm.design().features(); })
        .def("cdf_at", [](const DRModel& dm, double p, const std::string& x) {
            return dm.cdf_at(p, scenario_from_json_text(x));
        })
        .def("quantile_at", [](const DRModel& dm, double a, const std::string& x) {
            return dm.quantile_at(a, scenario_from_json_text(x));
        })
        .def("to_json", &model_to_json);

    m.def("model_from_json", &model_from_json, py::arg("text"));

    m.def(
        "fit_dr",
        [](const Dataset& d, int n_thresholds, const std::vector<std::string>& design,
           std::vector<double> weights) {
            const DesignMap map = design.empty() ? DesignMap::default_map() : DesignMap(design);
            return fit_dr(d, ThresholdGrid::uniform(n_thresholds), map, weights);
        },
        py::arg("dataset"), py::arg("n_thresholds") = 50,
        py::arg("design") = std::vector<std::string>{}, py::arg("weights") = std::vector<double>{});

    m.def(
        "fq_curve",
        [](const DRModel& dm, double tau, double lo, double hi, double step,
           const std::vector<std::pair<std::string, double>>& x_tilde,
           const std::string& support_config) {
            const RunConfig c = parse_config(support_config);
            return curve_dict(fq_curve(dm, tau, SGrid::uniform(c.dgp.support, lo, hi, step),
                                       mix_from(x_tilde)));
        },
        py::arg("model"), py::arg("tau"), py::arg("lo"), py::arg("hi"), py::arg("step"),
        py::arg("x_tilde"), py::arg("support_config") = "{}");

    m.def(
        "make_weights",
        [](const std::string& kind, double a, double b, const std::vector<double>& taus) {
            return make_weights(parse_weight_kind(kind), a, b, taus).omega;
        },
        py::arg("kind"), py::arg("a") = 1.0, py::arg("b") = 1.0,
        py::arg("taus") = default_tau_grid());

    m.def(
        "transfer_cost_curve",
        [](const std::vector<double>& grid, const std::vector<double>& values,
           const std::vector<double>& x_grid, double baseline_wage) {
            ReturnsCurve fs;
            fs.estimand = "FS";
            fs.grid = grid;
            fs.values = values;
            fs.extrapolated.assign(grid.size(), false);
            const CostTable t = transfer_cost_curve(fs, x_grid, baseline_wage);
            py::list rows;
            for (const auto& r : t.rows)
                rows.append(py::make_tuple(r.x, r.transfer, r.transfer_cost, r.cost_multiplier));
            py::dict out;
            out["f0"] = t.f0;
            out["rows"] = rows;
            out["elasticity"] = cost_elasticity(t);
            return out;
        },
        py::arg("grid"), py::arg("values"), py::arg("x_grid"), py::arg("baseline_wage"));

    m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); },
          py::arg("config_json"));

    m.def(
        "run_command",
        [](const std::string& command, const std::filesystem::path& config,
           std::optional<std::uint64_t> seed, std::optional<int> bootstrap,
           std::optional<std::filesystem::path> out) {
            RunConfig c = load_config(config);
            if (seed) c.seed = *seed;
            if (bootstrap) c.bootstrap = *bootstrap;
            if (out) c.out_dir = *out;
            c.canonical = config_to_json(c);
            std::ostringstream log;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_command(command, c, log);
            }
            py::list artifacts;
            for (const auto& a : r.artifacts) artifacts.append(py::make_tuple(a.path, a.sha256));
            return py::make_tuple(r.exit_code, artifacts, log.str());
        },
        py::arg("command"), py::arg("config"), py::arg("seed") = py::none(),
        py::arg("bootstrap") = py::none(), py::arg("out") = py::none());

    m.def(
        "run_acceptance",
        [](const std::vector<int>& ids, std::uint64_t seed) {
            AcceptanceOptions opt;
            opt.seed = seed;
            std::ostringstream log;
            std::vector<CriterionResult> res;
            {
                py::gil_scoped_release release;
                res = run_acceptance(opt, ids, log, false);
            }
            py::list out;
            for (const auto& r : res) out.append(py::make_tuple(r.id, r.name, r.pass, r.detail));
            return out;
        },
        py::arg("ids"), py::arg("seed") = AcceptanceOptions{}.seed);
}
