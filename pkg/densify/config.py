"""
YAML configuration loader & validator for densify experiments.

* one block per command, merged over ``DEFAULT_CONFIG``
* command-line flags merged over the file (flags win)
* raises early, clear ``ConfigError`` instead of logging-and-continuing
"""

from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from densify.errors import ConfigError
from densify.propagation import PathlossModel
from densify.seeding import U64_MAX

logger = logging.getLogger(__name__)

# --------------------------------------------------------------------------- #
# defaults                                                                    #
# --------------------------------------------------------------------------- #
BPM_DUAL = {"family": "bpm", "breakpoints_m": [1.0], "exponents": [2.0, 4.0]}
UPM_DUAL = {"family": "upm", "breakpoints_m": [1.0], "exponents": [2.0, 4.0]}

DEFAULT_CONFIG: Dict[str, Any] = {
    "run": {
        "seed": 0,
        "threads": 1,
        "trials": None,
        "out": "results",
        "format": "csv",
    },
    "regions": {
        "frequency_hz": 1.93e9,
        "antenna_dimension_m": 1.5,
        "tx_height_m": 10.0,
        "rx_height_m": 1.5,
        "bands": ["band2", "band4", "band38"],
    },
    "table1": {
        "densities_per_km2": [1.0, 25.0, 100.0, 2500.0, 1.0e4, 2.5e5],
        "thresholds_m": [1.0, 29.45, 13.1, 3.25],
        "empirical_trials": 0,
    },
    "throughput": {
        "models": {"bpm_dual": BPM_DUAL, "upm_dual": UPM_DUAL},
        "densities": {"start": 1.0e3, "stop": 3.0e6, "num": 15},
        "sinr_threshold_db": 0.0,
        "tx_power_dbm": 0.0,
        "fading": "rayleigh",
        "trials": 10000,
        "include_noise": False,
        "noise_dbm": -104.0,
        "fit_scaling": True,
    },
    "critical": {
        "taus_db": [0.0, 5.0, 10.0, 15.0, 20.0],
        "alpha1s": [3.0, 3.5, 4.0],
        "alpha0": 2.0,
        "breakpoint_m": 1.0,
        "mu_min": 1.0e2,
        "mu_max": 1.0e7,
        "tolerance": 0.05,
        "trials": 10000,
    },
    "heatmap": {
        "densities_per_km2": [3.6e3, 2.5e5],
        "side_m": 50.0,
        "resolution": 500,
        "guard_m": 12.5,
        "tx_power_dbm": 20.0,
        "fading": "none",
        "models": {
            "upm_single": {"family": "upm", "breakpoints_m": [], "exponents": [4.0]},
            "upm_dual": {"family": "upm", "breakpoints_m": [12.5], "exponents": [2.0, 4.0]},
            "bpm_dual": {"family": "bpm", "breakpoints_m": [12.5], "exponents": [2.0, 4.0]},
        },
    },
    "mitigation": {
        "model": BPM_DUAL,
        "densities": {"start": 1.0e2, "stop": 1.0e6, "num": 9},
        "sinr_threshold_db": 0.0,
        "include_noise": True,
        "tx_power_dbm": -60.0,
        "noise_dbm": -104.0,
        "trials": 5000,
        "strategies": [
            {"kind": "none"},
            {"kind": "sic"},
            {"kind": "ia", "budget": 2},
            {"kind": "ica", "budget": 2},
        ],
        "critical": None,
        "worked_example": True,
    },
    "fit": {
        "input": None,
        "synthetic": {
            "model": {"family": "bpm", "breakpoints_m": [3.3], "exponents": [1.5, 3.5]},
            "distances": {"start": 0.1, "stop": 30.0, "num": 40},
            "noise_sigma_db": 1.0,
            "frequency_hz": 2.0e9,
        },
        "tx_power_dbm": 0.0,
        "specs": [
            {"family": "upm", "slopes": 1},
            {"family": "bpm", "slopes": 1},
            {"family": "bpm", "slopes": 2},
        ],
    },
}

# mappings a user file replaces wholesale instead of merging into
REPLACED_KEYS = (("throughput", "models"), ("heatmap", "models"))

COMMANDS = ("regions", "table1", "throughput", "critical", "heatmap", "mitigation", "fit")


def _recursive_merge(base: dict, override: dict) -> dict:
    """Non-destructive deep merge (override wins)."""
    merged = base.copy()
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            merged[k] = _recursive_merge(base[k], v)
        else:
            merged[k] = v
    return merged


# --------------------------------------------------------------------------- #
# validation helpers                                                          #
# --------------------------------------------------------------------------- #
def _positive_number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{where} must be a positive number, got {value!r}")
    return float(value)


def _positive_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"{where} must be a positive integer, got {value!r}")
    return value


def _number_list(value: Any, where: str) -> List[float]:
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a non-empty list")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{where} must contain numbers, got {v!r}")
    return [float(v) for v in value]


def _model(value: Any, where: str) -> PathlossModel:
    try:
        return PathlossModel.from_dict(value)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def density_grid(block: Any, where: str) -> List[float]:
    """Explicit list or ``{start, stop, num}`` log-spaced grid."""
    if isinstance(block, list):
        grid = _number_list(block, where)
    elif isinstance(block, dict):
        start = _positive_number(block.get("start"), f"{where}.start")
        stop = _positive_number(block.get("stop"), f"{where}.stop")
        num = _positive_int(block.get("num"), f"{where}.num")
        if stop <= start and num > 1:
            raise ConfigError(f"{where}: stop must exceed start")
        grid = [float(v) for v in np.logspace(np.log10(start), np.log10(stop), num)]
    else:
        raise ConfigError(f"{where} must be a list or a {{start, stop, num}} mapping")
    for v in grid:
        _positive_number(v, where)
    return grid


def validate(cfg: dict) -> dict:
    run = cfg["run"]
    seed = run.get("seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed <= U64_MAX:
        raise ConfigError(f"run.seed must be an unsigned 64-bit integer, got {seed!r}")
    _positive_int(run.get("threads"), "run.threads")
    if run.get("trials") is not None:
        _positive_int(run["trials"], "run.trials")
    if str(run.get("format", "csv")).lower() not in {"csv", "parquet"}:
        raise ConfigError(f"run.format must be 'csv' or 'parquet', got {run.get('format')!r}")

    _number_list(cfg["table1"]["densities_per_km2"], "table1.densities_per_km2")
    _number_list(cfg["table1"]["thresholds_m"], "table1.thresholds_m")

    tp = cfg["throughput"]
    if not isinstance(tp["models"], dict) or not tp["models"]:
        raise ConfigError("throughput.models must be a non-empty mapping of label → model")
    for label, spec in tp["models"].items():
        _model(spec, f"throughput.models.{label}")
    density_grid(tp["densities"], "throughput.densities")

    cr = cfg["critical"]
    _number_list(cr["taus_db"], "critical.taus_db")
    _number_list(cr["alpha1s"], "critical.alpha1s")
    if not 0 < _positive_number(cr["mu_min"], "critical.mu_min") < _positive_number(cr["mu_max"], "critical.mu_max"):
        raise ConfigError("critical.mu_min must be below critical.mu_max")

    hm = cfg["heatmap"]
    _number_list(hm["densities_per_km2"], "heatmap.densities_per_km2")
    if not isinstance(hm["models"], dict) or not hm["models"]:
        raise ConfigError("heatmap.models must be a non-empty mapping of label → model")
    for label, spec in hm["models"].items():
        _model(spec, f"heatmap.models.{label}")
    guard = hm["guard_m"]
    if isinstance(guard, bool) or not isinstance(guard, (int, float)) or not guard >= 0:
        raise ConfigError(f"heatmap.guard_m must be a number >= 0, got {guard!r}")
    res = hm["resolution"]
    if isinstance(res, bool) or not isinstance(res, int) or res < 2:
        raise ConfigError(f"heatmap.resolution must be an integer >= 2, got {res!r}")

    mt = cfg["mitigation"]
    _model(mt["model"], "mitigation.model")
    density_grid(mt["densities"], "mitigation.densities")
    if not isinstance(mt["strategies"], list) or not mt["strategies"]:
        raise ConfigError("mitigation.strategies must be a non-empty list")
    if mt.get("critical") is not None:
        crit = mt["critical"]
        if not isinstance(crit, dict):
            raise ConfigError("mitigation.critical must be null or a {mu_min, mu_max} mapping")
        low = _positive_number(crit.get("mu_min"), "mitigation.critical.mu_min")
        if not low < _positive_number(crit.get("mu_max"), "mitigation.critical.mu_max"):
            raise ConfigError("mitigation.critical.mu_min must be below mu_max")

    ft = cfg["fit"]
    if not isinstance(ft["specs"], list) or not ft["specs"]:
        raise ConfigError("fit.specs must be a non-empty list")
    return cfg


# --------------------------------------------------------------------------- #
# public API                                                                  #
# --------------------------------------------------------------------------- #
def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> dict:
    """
    Read a YAML (or JSON) file, apply defaults and flag overrides, validate.

    :param path: config file, or ``None`` for defaults only
    :param overrides: nested dict of flag values (already stripped of ``None``)
    :returns: fully-populated config dict
    :raises ConfigError
    """
    cfg: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            with path.open("r", encoding="utf-8") as fh:
                cfg = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError(f"{path} must contain a mapping at the top level")
        unknown = set(cfg) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        for section, block in cfg.items():
            if not isinstance(block, dict):
                raise ConfigError(f"section '{section}' must be a mapping")

    merged = _recursive_merge(copy.deepcopy(DEFAULT_CONFIG), cfg)
    for section, key in REPLACED_KEYS:
        if isinstance(cfg.get(section), dict) and key in cfg[section]:
            merged[section][key] = cfg[section][key]
    merged = _recursive_merge(merged, overrides or {})
    return validate(merged)


def command_trials(cfg: dict, command: str) -> int:
    """``run.trials`` if set (the --trials flag), else the command's own count."""
    override = cfg["run"].get("trials")
    return int(override if override is not None else cfg[command]["trials"])
