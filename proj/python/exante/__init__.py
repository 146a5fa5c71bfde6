"""Python interface to the exante core library."""

import json

from . import _exante
from ._exante import (
    Dataset,
    DRModel,
    ExanteError,
    config_hash,
    load_dataset,
    make_weights,
    model_from_json,
    run_acceptance,
    run_command,
    transfer_cost_curve,
)

__all__ = [
    "Dataset",
    "DRModel",
    "ExanteError",
    "cdf_at",
    "config_hash",
    "fit_dr",
    "fq_curve",
    "load_dataset",
    "make_weights",
    "model_from_json",
    "quantile_at",
    "run_acceptance",
    "run_command",
    "simulate",
    "transfer_cost_curve",
]


def _config_text(config):
    return config if isinstance(config, str) else json.dumps(config)


def simulate(config, seed):
    """Simulated survey for the DGP described by a config (dict or JSON text)."""
    return _exante.simulate_from_config(_config_text(config), seed)


def fit_dr(dataset, n_thresholds=50, design=None, weights=None):
    return _exante.fit_dr(dataset, n_thresholds, list(design or []), list(weights or []))


def cdf_at(model, p, scenario):
    return model.cdf_at(p, json.dumps(scenario))


def quantile_at(model, a, scenario):
    return model.quantile_at(a, json.dumps(scenario))


def fq_curve(model, tau, lo, hi, step, x_tilde, config=None):
    """F_Q(.; tau) on lo..hi. x_tilde is a list of (scenario dict, mass)."""
    mix = [(json.dumps(x), float(m)) for x, m in x_tilde]
    return _exante.fq_curve(model, tau, lo, hi, step, mix, _config_text(config or {}))
