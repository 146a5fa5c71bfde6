import json
import pathlib

import pytest

import exante

ROOT = pathlib.Path(__file__).resolve().parents[2]
CONFIG = ROOT / "configs" / "default.json"


def small_config():
    cfg = json.loads(CONFIG.read_text())
    cfg["dgp"]["respondents"] = 300
    return cfg


def test_simulate_and_validate():
    d = exante.simulate(small_config(), seed=3)
    assert len(d) == 600
    report = d.validate()
    assert report["paired_count"] == 300
    assert report["duplicate_keys"] == 0


def test_fit_and_evaluate():
    d = exante.simulate(small_config(), seed=4)
    m = exante.fit_dr(d, n_thresholds=20, design=small_config()["estimator"]["design"])
    x = {"wage_pub": 800, "wage_priv": 800, "layoff_pub": 0.05, "layoff_priv": 0.08,
         "promo_pub": 0.3, "promo_priv": 0.3}
    assert exante.cdf_at(m, 1.0, x) == 1.0
    assert exante.cdf_at(m, 0.0, x) == 0.0
    assert 0.0 < exante.quantile_at(m, 0.5, x) <= 1.0
    back = exante.model_from_json(m.to_json())
    assert back.thresholds == m.thresholds

    cfg = small_config()
    c = exante.fq_curve(m, 0.5, -700, 700, 10, [(x, 1.0)], config={"support": cfg["support"]})
    vals = c["values"]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert len(c["grid"]) == len(vals)


def test_weights_and_cost_curve():
    w = exante.make_weights("beta", 2, 5)
    assert abs(sum(w) / len(w) - 1.0) < 1e-12
    grid = [i / 10 for i in range(-10, 11)]
    res = exante.transfer_cost_curve(grid, [(s + 1) / 2 for s in grid], [0.0, 0.01, 0.1], 1.0)
    x, transfer, cost, _ = res["rows"][2]
    assert abs(transfer - 0.2) < 1e-9 and abs(cost - 0.12) < 1e-9


def test_errors_are_prefixed():
    with pytest.raises(exante.ExanteError, match="config"):
        exante.config_hash('{"bogus": 1}')
    with pytest.raises(exante.ExanteError, match="policy"):
        exante.make_weights("beta", 0, 1)


def test_cli_commands_from_python(tmp_path):
    cfg = small_config()
    cfg["estimator"]["thresholds"]["n"] = 20
    cfg["dgp"]["oracle_draws"] = 2000
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    with pytest.raises(exante.ExanteError, match="fit required"):
        exante.run_command("curves", str(path), out=str(tmp_path / "o"))
    code, artifacts, _ = exante.run_command("simulate", str(path), out=str(tmp_path / "o"))
    assert code == 0
    assert {"dataset.csv", "truth_curves.csv"} <= {p for p, _ in artifacts}


def test_acceptance_identity():
    [(cid, name, ok, detail)] = exante.run_acceptance([1])
    assert cid == 1 and ok, detail
