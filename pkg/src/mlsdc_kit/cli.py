"""Command-line interface: ``mlsdc-kit {run,table,error-components,quadrature}``.

Exit codes: 0 success, 2 configuration error, 3 divergence, 4 at least one
time step did not reach the residual tolerance.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from .collocation import make_rule
from .config import ConfigError, build_run, mlsdc_config, resolve_config
from .controller import DivergenceError, StepFailure, run_simulation

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_DIVERGED", "EXIT_UNCONVERGED"]

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_UNCONVERGED = 0, 2, 3, 4
THREADS_ENV = "MLSDC_KIT_THREADS"
ERROR_COLUMNS = ("k", "level", "eps_pde", "eps_ode", "eps_coll", "eps_n", "eps_dt")

log = logging.getLogger("mlsdc_kit")

TABLE_OPTIONS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "nodes": {"type": "array", "items": {"type": "integer", "minimum": 2}},
        "nus": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
        "variants": {"type": "array", "items": {"enum": ["1,2", "1,2,3(1)", "1,2,3(2)", "2,3(1)"]}},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "k_max": {"type": "integer", "minimum": 1},
        "wave": {"type": "object", "additionalProperties": False, "properties": {
            "fine_points": {"type": "integer"}, "coarse_points": {"type": "integer"},
            "fine_order": {"enum": [2, 4]}, "coarse_order": {"enum": [2, 4]},
            "dt": {"type": "number"}, "n_steps": {"type": "integer"}, "tol": {"type": "number"},
            "width": {"type": "number"}}},
        "burgers": {"type": "object", "additionalProperties": False, "properties": {
            "sigma": {"type": "number"}, "dt": {"type": "number"}, "nodes": {"type": "integer"}}},
        "shear": {"type": "object", "additionalProperties": False, "properties": {
            "n_points": {"type": "integer"}, "nu": {"type": "number"}, "rho": {"type": "number"},
            "delta": {"type": "number"}, "nodes": {"type": "integer"}, "dt": {"type": "number"},
            "n_steps": {"type": "integer"}, "tol": {"type": "number"}}},
        "note": {"type": "string"},
    },
}


# ---------------------------------------------------------------------------
# helpers

def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path}: line {err.lineno} column {err.colno}: {err.msg}") from None


def _dump_json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in r])
    return buf.getvalue()


def state_checksum(u):
    return hashlib.sha256(np.ascontiguousarray(u, dtype="<f8").tobytes()).hexdigest()


def _max_workers(jobs):
    cap = os.environ.get(THREADS_ENV)
    n = max(1, int(jobs))
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer %s=%r", THREADS_ENV, cap)
    return n


def _is_divergence(exc):
    cause = exc.cause if isinstance(exc, StepFailure) else exc
    return isinstance(cause, DivergenceError)


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args):
    cfg = resolve_config(_load_json(args.config))
    hier, u0 = build_run(cfg)
    steps = []

    def on_step(n, u, stats):
        steps.append({"step": n, **stats.as_dict()})

    result = {"config": cfg}
    status = EXIT_OK
    try:
        u, sim = run_simulation(hier, u0, 0.0, cfg["n_steps"], cfg["dt"], mlsdc_config(cfg),
                                cfg["method"], step_callback=on_step)
    except (StepFailure, DivergenceError) as exc:
        if not _is_divergence(exc):
            raise
        log.error("%s", exc)
        result["error"] = str(exc)
        result["steps"] = steps
        _write_text(args.out, _dump_json(result))
        return EXIT_DIVERGED
    unconverged = sim.unconverged_steps
    result["summary"] = {
        "average_fine_sweeps": sim.average_fine_sweeps,
        "n_steps": len(sim.steps),
        "final_time": cfg["n_steps"] * cfg["dt"],
        "unconverged_steps": unconverged,
        "final_state_sha256": state_checksum(u),
        "final_state_max_abs": float(np.max(np.abs(u))),
    }
    result["steps"] = steps
    _write_text(args.out, _dump_json(result))
    log.info("average fine sweeps %.4f", sim.average_fine_sweeps)
    if unconverged:
        log.warning("%d step(s) did not converge", len(unconverged))
        status = EXIT_UNCONVERGED
    return status


def cmd_table(args):
    from .benchmarks.tables import TABLE_COLUMNS, resolved_options, run_cell, table_cells

    options = {}
    if args.config:
        options = _load_json(args.config)
        try:
            jsonschema.validate(options, TABLE_OPTIONS_SCHEMA)
        except jsonschema.ValidationError as err:
            path = "/".join(str(p) for p in err.absolute_path) or "<root>"
            raise ConfigError(f"config field {path}: {err.message}") from None
    cells = table_cells(args.table_id, options)
    workers = min(_max_workers(args.jobs), len(cells))
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(run_cell, cells))
        else:
            results = [run_cell(c) for c in cells]
    except (StepFailure, DivergenceError) as exc:
        if not _is_divergence(exc):
            raise
        log.error("%s", exc)
        return EXIT_DIVERGED
    rows = [r for r, _ in results]
    _write_text(args.out, _csv_text(TABLE_COLUMNS, [[r[c] for c in TABLE_COLUMNS] for r in rows]))
    if args.out not in (None, "-"):
        meta = {"table": args.table_id, "options": resolved_options(args.table_id, options),
                "cells": [{"row": r, "stats": s} for r, s in results]}
        _write_text(str(Path(args.out).with_suffix(".meta.json")), _dump_json(meta))
    if any(s["unconverged_steps"] for _, s in results):
        return EXIT_UNCONVERGED
    return EXIT_OK


def cmd_error_components(args):
    from .benchmarks.burgers import BurgersSetup, LevelSpec
    from .benchmarks.errors import burgers_error_study
    from .config import _policy

    raw = _load_json(args.config)
    cfg = resolve_config(raw)
    if cfg["problem"] != "burgers1d":
        raise ConfigError("config field problem: error-components supports burgers1d only")
    if "k_max" not in raw:
        cfg["k_max"] = 80
    p = cfg["params"]
    specs = tuple(LevelSpec(lv["n_points"], lv["space_order"], lv["advection"], _policy(lv))
                  for lv in cfg["levels"])
    try:
        setup = BurgersSetup(nu=p["nu"], sigma=p["sigma"], dt=cfg["dt"], nodes=cfg["nodes"], levels=specs,
                             ref_n_points=p["ref_n_points"], ref_dt=p["ref_dt"], ref_nodes=p["ref_nodes"],
                             coll_sweeps=p["coll_sweeps"])
        for s in specs:
            setup.grid(s.n_points)
        if any(p["ref_n_points"] % s.n_points for s in specs):
            raise ValueError("ref_n_points must be a multiple of every level size")
    except ValueError as err:
        raise ConfigError(f"config: {err}") from None
    try:
        report, _ = burgers_error_study(setup, cfg["k_max"], cfg["method"])
    except (StepFailure, DivergenceError) as exc:
        if not _is_divergence(exc):
            raise
        log.error("%s", exc)
        return EXIT_DIVERGED
    _write_text(args.out, _csv_text(ERROR_COLUMNS, report.rows()))
    return EXIT_OK


def cmd_quadrature(args):
    if args.nodes < 2:
        raise ConfigError("--nodes must be at least 2")
    rule = make_rule(args.nodes)
    rows = [("node", i, "", x) for i, x in enumerate(rule.nodes)]
    rows += [("q", i, j, rule.q[i, j]) for i in range(rule.q.shape[0]) for j in range(rule.q.shape[1])]
    rows += [("s", i, j, rule.s[i, j]) for i in range(rule.s.shape[0]) for j in range(rule.s.shape[1])]
    _write_text(args.out, _csv_text(("matrix", "row", "col", "value"),
                                    [(m, i, j, float(v)) for m, i, j, v in rows]))
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="mlsdc-kit", description="SDC and multi-level SDC experiments")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configured simulation and write a JSON result")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("table", help="reproduce a sweep-count table as CSV")
    p.add_argument("table_id", type=int, choices=(1, 2, 3))
    p.add_argument("--config", help="JSON table options (grid size, steps, variants, ...)")
    p.add_argument("--out", default="-")
    p.add_argument("--jobs", type=int, default=1, help=f"parallel cells (capped by ${THREADS_ENV})")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("error-components", help="per-iteration error components of a Burgers step")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_error_components)

    p = sub.add_parser("quadrature", help="dump Lobatto nodes and integration matrices")
    p.add_argument("--nodes", type=int, required=True, help="number of collocation nodes M+1")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_quadrature)

    for sp_ in sub.choices.values():
        sp_.add_argument("--verbose", "-v", action="count", default=0, dest="verbose_sub",
                         help=argparse.SUPPRESS)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    verbosity = args.verbose + getattr(args, "verbose_sub", 0)
    level = logging.WARNING if verbosity == 0 else (logging.INFO if verbosity == 1 else logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("mlsdc_kit").setLevel(level)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
