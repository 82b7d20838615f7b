"""Drivers that reproduce the sweep-count tables for the three benchmarks.

Every driver returns a list of row dicts with the keys of ``TABLE_COLUMNS``;
rows are independent cells and can be computed in any order.
"""

from __future__ import annotations

from dataclasses import asdict, replace

from ..controller import MLSDCConfig, run_simulation, run_step
from .burgers import BurgersSetup, burgers_initial, make_burgers_hierarchy
from .shear import SHEAR_VARIANTS, ShearSetup, make_shear_hierarchy, shear_initial_vorticity
from .wave import WaveSetup, make_wave_hierarchy, wave_initial

__all__ = [
    "TABLE_COLUMNS",
    "PUBLISHED",
    "table_cells",
    "run_cell",
    "rel_dev",
]

TABLE_COLUMNS = ("method", "variant", "nodes", "nu", "avg_fine_sweeps", "paper_value", "rel_dev")

# published average fine-sweep counts, keyed by cell
PUBLISHED = {
    1: {("sdc", 3): 18.5, ("mlsdc", 3): 11.1, ("sdc", 5): 17.6, ("mlsdc", 5): 10.6,
        ("sdc", 7): 14.3, ("mlsdc", 7): 8.2},
    2: {("sdc", 0.1): 4, ("mlsdc", 0.1): 3, ("sdc", 1.0): 12, ("mlsdc", 1.0): 7},
    3: {None: 6.46, "1,2": 6.64, "1,2,3(1)": 6.62, "1,2,3(2)": 6.64, "2,3(1)": 5.26},
}


def rel_dev(value, reference):
    return (value - reference) / reference


def table_cells(table_id, options=None):
    """List of cell descriptors ``(table_id, key, options)`` in output order."""
    options = dict(options or {})
    if table_id == 1:
        keys = [(m, n) for n in options.get("nodes", (3, 5, 7)) for m in ("sdc", "mlsdc")]
    elif table_id == 2:
        keys = [(m, nu) for nu in options.get("nus", (0.1, 1.0)) for m in ("sdc", "mlsdc")]
    elif table_id == 3:
        keys = [None] + list(options.get("variants", SHEAR_VARIANTS))
    else:
        raise ValueError(f"unknown table {table_id!r}")
    return [(table_id, k, options) for k in keys]


def _row(method, variant, nodes, nu, value, published):
    return {
        "method": method,
        "variant": variant,
        "nodes": nodes,
        "nu": nu,
        "avg_fine_sweeps": float(value),
        "paper_value": published,
        "rel_dev": None if published is None else rel_dev(float(value), published),
    }


def _wave_cell(key, options):
    method, nodes = key
    setup = replace(WaveSetup(), **options.get("wave", {}))
    hier = make_wave_hierarchy(setup, nodes, 2 if method == "mlsdc" else 1)
    u0 = wave_initial(hier.levels[0].grid, setup.width)
    cfg = MLSDCConfig(tol=setup.tol, k_max=options.get("k_max", 100))
    _, stats = run_simulation(hier, u0, 0.0, setup.n_steps, setup.dt, cfg, method)
    row = _row(method, "1,2" if method == "mlsdc" else "", nodes, None, stats.average_fine_sweeps,
               PUBLISHED[1].get(key))
    return row, stats


def _burgers_cell(key, options):
    method, nu = key
    setup = replace(BurgersSetup(nu=nu), **options.get("burgers", {}))
    hier = make_burgers_hierarchy(setup)
    if method == "sdc":
        hier = type(hier)(hier.levels[:1], hier.rule)
    u0 = burgers_initial(hier.levels[0].grid, setup.sigma)
    cfg = MLSDCConfig(tol=options.get("tol", 1e-5), k_max=options.get("k_max", 50))
    _, stats, _ = run_step(hier, u0, 0.0, setup.dt, cfg, method)
    row = _row(method, "1,2,3(1)" if method == "mlsdc" else "", setup.nodes, nu, stats.fine_sweeps,
               PUBLISHED[2].get(key))
    return row, stats


def _shear_cell(key, options):
    setup = replace(ShearSetup(), **options.get("shear", {}))
    hier = make_shear_hierarchy(setup, key)
    w0 = shear_initial_vorticity(hier.levels[0].grid, setup.rho, setup.delta, setup.fine_order)
    cfg = MLSDCConfig(tol=setup.tol, k_max=options.get("k_max", 50))
    method = "sdc" if key is None else "mlsdc"
    _, stats = run_simulation(hier, w0, 0.0, setup.n_steps, setup.dt, cfg, method)
    row = _row(method, key or "", setup.nodes, setup.nu, stats.average_fine_sweeps, PUBLISHED[3].get(key))
    return row, stats


_DRIVERS = {1: _wave_cell, 2: _burgers_cell, 3: _shear_cell}


def run_cell(cell):
    """Run one table cell; returns ``(row, stats_dict)``."""
    table_id, key, options = cell
    row, stats = _DRIVERS[table_id](key, options)
    if hasattr(stats, "steps"):
        info = {"average_fine_sweeps": stats.average_fine_sweeps,
                "unconverged_steps": stats.unconverged_steps,
                "fine_sweeps": [s.fine_sweeps for s in stats.steps]}
    else:
        info = {"average_fine_sweeps": float(stats.fine_sweeps),
                "unconverged_steps": [] if stats.converged else [0],
                "fine_sweeps": [stats.fine_sweeps]}
    return row, info


def resolved_options(table_id, options=None):
    """The table options with every benchmark default filled in (for provenance)."""
    options = dict(options or {})
    if table_id == 1:
        base = asdict(replace(WaveSetup(), **options.get("wave", {})))
        return {**options, "wave": base, "nodes": list(options.get("nodes", (3, 5, 7)))}
    if table_id == 2:
        setup = replace(BurgersSetup(), **options.get("burgers", {}))
        base = {k: v for k, v in asdict(setup).items() if k not in ("nu", "levels")}
        base["levels"] = [_spec_dict(s) for s in setup.levels]
        return {**options, "burgers": base, "nus": list(options.get("nus", (0.1, 1.0))),
                "tol": options.get("tol", 1e-5)}
    base = asdict(replace(ShearSetup(), **options.get("shear", {})))
    return {**options, "shear": base, "variants": list(options.get("variants", SHEAR_VARIANTS))}


def _spec_dict(spec):
    return {"n_points": spec.n_points, "space_order": spec.space_order, "advection": spec.advection,
            "solve": asdict(spec.policy)}
