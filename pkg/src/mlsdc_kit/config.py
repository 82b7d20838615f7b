"""Run configuration: JSON schema, defaults and construction of hierarchies."""

from __future__ import annotations

import copy

import jsonschema
import numpy as np

from .collocation import make_rule
from .controller import MLSDCConfig
from .problem import Hierarchy, SolvePolicy
from .spatial import Grid1D, Grid2D

__all__ = ["RUN_SCHEMA", "ConfigError", "resolve_config", "build_run", "mlsdc_config"]


class ConfigError(ValueError):
    """Invalid configuration (bad JSON, schema violation or inconsistent values)."""


_SOLVE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": ["full", "fixed_vcycles"]},
        "n_cycles": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_cycles": {"type": "integer", "minimum": 1},
    },
}

_LEVEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["n_points"],
    "properties": {
        "n_points": {"type": "integer", "minimum": 1},
        "space_order": {"enum": [2, 4]},
        "solve": _SOLVE,
        "advection": {"enum": ["weno5", "upwind1"]},
    },
}

_PARAMS = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "nu": {"type": "number", "minimum": 0},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "delta": {"type": "number"},
        "lambda": {"type": "number"},
        "lambda_explicit": {"type": "number"},
        "width": {"type": "number", "exclusiveMinimum": 0},
        "u0": {"type": "number"},
        "ref_n_points": {"type": "integer", "minimum": 16},
        "ref_dt": {"type": "number", "exclusiveMinimum": 0},
        "ref_nodes": {"type": "integer", "minimum": 2},
        "coll_sweeps": {"type": "integer", "minimum": 1},
    },
}

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["problem"],
    "properties": {
        "problem": {"enum": ["wave1d", "burgers1d", "shear2d", "dahlquist"]},
        "method": {"enum": ["sdc", "mlsdc"]},
        "levels": {"type": "array", "minItems": 1, "items": _LEVEL},
        "nodes": {"type": "integer", "minimum": 2},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "n_steps": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "minimum": 0},
        "k_max": {"type": "integer", "minimum": 1},
        "params": _PARAMS,
        "f_transfer_mode": {"enum": ["interpolate_increments", "re_evaluate"]},
        "interp_degree": {"type": "integer", "minimum": 1},
        "note": {"type": "string"},
    },
}

_FULL = {"mode": "full", "n_cycles": 1, "tol": 1e-12, "max_cycles": 100}

DEFAULTS = {
    "wave1d": {
        "levels": [{"n_points": 128, "space_order": 4}, {"n_points": 64, "space_order": 2}],
        "nodes": 7, "dt": 0.025, "n_steps": 40, "tol": 5e-8, "k_max": 100,
        "params": {"width": 0.1},
    },
    "burgers1d": {
        "levels": [
            {"n_points": 256, "space_order": 4, "advection": "weno5",
             "solve": {"mode": "full", "tol": 5e-14}},
            {"n_points": 128, "space_order": 2, "advection": "upwind1",
             "solve": {"mode": "fixed_vcycles", "n_cycles": 1}},
        ],
        "nodes": 7, "dt": 0.01, "n_steps": 1, "tol": 1e-5, "k_max": 50,
        "params": {"nu": 0.1, "sigma": 0.1, "ref_n_points": 1024, "ref_dt": 1e-4, "ref_nodes": 9,
                   "coll_sweeps": 100},
    },
    "shear2d": {
        "levels": [
            {"n_points": 128, "space_order": 4, "solve": {"mode": "full", "tol": 1e-15}},
            {"n_points": 64, "space_order": 2, "solve": {"mode": "fixed_vcycles", "n_cycles": 1}},
        ],
        "nodes": 9, "dt": 1.0 / 256, "n_steps": 256, "tol": 1e-12, "k_max": 50,
        "params": {"nu": 1e-3, "rho": 50.0, "delta": 0.05},
    },
    "dahlquist": {
        "levels": [{"n_points": 1}],
        "nodes": 5, "dt": 0.1, "n_steps": 1, "tol": 1e-12, "k_max": 50,
        "params": {"lambda": -1.0, "lambda_explicit": 0.0, "u0": 1.0},
    },
}

COMMON_DEFAULTS = {"method": "mlsdc", "f_transfer_mode": "interpolate_increments", "interp_degree": 3}


def _error_path(err):
    path = "/".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def resolve_config(raw):
    """Validate ``raw`` against the schema and return a copy with defaults filled in."""
    try:
        jsonschema.validate(raw, RUN_SCHEMA)
    except jsonschema.ValidationError as err:
        raise ConfigError(f"config field {_error_path(err)}: {err.message}") from None
    problem = raw["problem"]
    cfg = copy.deepcopy(COMMON_DEFAULTS)
    base = copy.deepcopy(DEFAULTS[problem])
    cfg.update(base)
    for key, value in raw.items():
        if key == "params":
            cfg["params"] = {**base["params"], **value}
        else:
            cfg[key] = copy.deepcopy(value)
    if cfg["interp_degree"] % 2 == 0:
        raise ConfigError("config field interp_degree: must be odd")
    levels = []
    for i, lv in enumerate(cfg["levels"]):
        lv = dict(lv)
        lv.setdefault("space_order", 4 if i == 0 else 2)
        if problem == "burgers1d":
            lv.setdefault("advection", "weno5" if lv["space_order"] == 4 else "upwind1")
        elif "advection" in lv:
            raise ConfigError(f"config field levels/{i}/advection: only valid for burgers1d")
        lv["solve"] = {**_FULL, **lv.get("solve", {})}
        levels.append(lv)
    cfg["levels"] = levels
    if cfg["method"] == "sdc":
        cfg["levels"] = levels[:1]
    elif len(levels) < 2 and problem != "dahlquist":
        raise ConfigError("config field levels: mlsdc needs at least two levels")
    return cfg


def mlsdc_config(cfg):
    return MLSDCConfig(tol=cfg["tol"], k_max=cfg["k_max"], f_transfer_mode=cfg["f_transfer_mode"],
                       interp_degree=cfg["interp_degree"])


def _policy(lv):
    s = lv["solve"]
    return SolvePolicy(mode=s["mode"], n_cycles=s["n_cycles"], tol=s["tol"], max_cycles=s["max_cycles"])


def build_run(cfg):
    """Return ``(hierarchy, u0)`` for a resolved configuration."""
    from .benchmarks.burgers import BurgersLevel, burgers_initial
    from .benchmarks.common import DahlquistLevel
    from .benchmarks.shear import ShearLevel, shear_initial_vorticity
    from .benchmarks.wave import WaveLevel, wave_initial

    problem, p = cfg["problem"], cfg["params"]
    levels = []
    try:
        for lv in cfg["levels"]:
            n, order = lv["n_points"], lv["space_order"]
            if problem == "wave1d":
                levels.append(WaveLevel(Grid1D(n), order))
            elif problem == "burgers1d":
                levels.append(BurgersLevel(Grid1D(n, domain=(-1.0, 1.0)), p["nu"], order,
                                           lv["advection"], _policy(lv)))
            elif problem == "shear2d":
                levels.append(ShearLevel(Grid2D(n, n), p["nu"], order, _policy(lv)))
            else:
                levels.append(DahlquistLevel(p["lambda"], p["lambda_explicit"]))
        hier = Hierarchy(levels, make_rule(cfg["nodes"]))
    except ValueError as err:
        raise ConfigError(f"config field levels: {err}") from None
    g = levels[0].grid
    if problem == "wave1d":
        u0 = wave_initial(g, p["width"])
    elif problem == "burgers1d":
        u0 = burgers_initial(g, p["sigma"])
    elif problem == "shear2d":
        u0 = shear_initial_vorticity(g, p["rho"], p["delta"], cfg["levels"][0]["space_order"])
    else:
        u0 = np.array([p["u0"]], dtype=float)
    return hier, u0
