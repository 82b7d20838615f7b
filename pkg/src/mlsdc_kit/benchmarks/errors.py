"""Error components of an MLSDC step measured against reference solutions.

All errors are relative max-norm errors, scaled by the max norm of the
high-resolution PDE reference.  On every level the iterate is compared
with the fine-level references injected onto that level's grid; the
spatial and temporal error estimates of a level come from references
built with that level's own discretization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..controller import MLSDCConfig, run_step
from ..problem import restrict
from .burgers import burgers_initial, make_burgers_hierarchy, reference_solutions

__all__ = ["ErrorReport", "error_components", "burgers_error_study"]


@dataclass
class ErrorReport:
    """Per-iteration, per-level errors plus per-level eps_n / eps_dt estimates."""

    eps_pde: list = field(default_factory=list)   # [level][k-1]
    eps_ode: list = field(default_factory=list)
    eps_coll: list = field(default_factory=list)
    eps_n: list = field(default_factory=list)     # [level]
    eps_dt: list = field(default_factory=list)

    @property
    def n_levels(self):
        return len(self.eps_n)

    @property
    def n_iterations(self):
        return len(self.eps_pde[0]) if self.eps_pde else 0

    def rows(self):
        """``(k, level, eps_pde, eps_ode, eps_coll, eps_n, eps_dt)`` with 1-based k and level."""
        out = []
        for k in range(self.n_iterations):
            for l in range(self.n_levels):
                out.append((k + 1, l + 1, self.eps_pde[l][k], self.eps_ode[l][k],
                            self.eps_coll[l][k], self.eps_n[l], self.eps_dt[l]))
        return out


def _rel(a, b, scale):
    return float(np.max(np.abs(a - b)) / scale)


def error_components(iterates, refs, fine_refs, levels):
    """Build an :class:`ErrorReport`.

    ``iterates[k][l]`` is the end-of-step value on level ``l`` after
    iteration ``k + 1``; ``refs[l]`` holds the level's own ``pde``, ``ode``
    and ``coll`` references, and ``fine_refs`` the finest level's.
    """
    rep = ErrorReport()
    fine = levels[0]
    for l, lev in enumerate(levels):
        r = refs[l]
        scale = float(np.max(np.abs(r["pde"])))
        inj = {key: restrict(fine_refs[key], fine, lev) for key in ("pde", "ode", "coll")}
        rep.eps_n.append(_rel(r["pde"], r["ode"], scale))
        rep.eps_dt.append(_rel(r["ode"], r["coll"], scale))
        rep.eps_pde.append([_rel(inj["pde"], it[l], scale) for it in iterates])
        rep.eps_ode.append([_rel(inj["ode"], it[l], scale) for it in iterates])
        rep.eps_coll.append([_rel(inj["coll"], it[l], scale) for it in iterates])
    return rep


def burgers_error_study(setup, k_iterations=80, method="mlsdc", refs=None):
    """Run one Burgers step for exactly ``k_iterations`` iterations and
    return ``(ErrorReport, references)``.

    Coarse-level values are the coarse iterates after the coarse sweep of
    each iteration (the last restricted values if the fine level has
    already converged exactly).
    """
    hier = make_burgers_hierarchy(setup)
    levels = hier.levels if method == "mlsdc" else hier.levels[:1]
    refs = reference_solutions(setup) if refs is None else refs
    u0 = burgers_initial(levels[0].grid, setup.sigma)
    iterates = []

    def record(k, states):
        row = []
        for l, lev in enumerate(levels):
            st = states[l]
            row.append(st.u[-1].copy() if st is not None else restrict(states[0].u[-1], levels[0], lev))
        iterates.append(row)

    cfg = MLSDCConfig(tol=0.0, k_max=k_iterations)
    run_step(hier, u0, 0.0, setup.dt, cfg, method, callback=record)
    return error_components(iterates, refs[:len(levels)], refs[0], levels), refs
