"""1D viscous Burgers' equation on a periodic interval.

Advection ``-(u^2/2)_x`` is explicit (WENO5 or first-order upwind);
diffusion ``nu u_xx`` is implicit (fourth-order compact pair or the
standard second-order stencil).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..collocation import make_rule
from ..controller import MLSDCConfig, run_simulation, run_step
from ..problem import Hierarchy, SolvePolicy
from ..spatial import Grid1D, advect_upwind1, advect_weno5
from .common import StencilLevel, diffusion_pair

__all__ = [
    "BurgersLevel",
    "BurgersSetup",
    "LevelSpec",
    "make_burgers_hierarchy",
    "burgers_initial",
    "reference_solutions",
]

# residual bound for reference runs; tighter bounds stall at round-off on N=1024
REF_TOL = 1e-12

ADVECTION = {"weno5": advect_weno5, "upwind1": advect_upwind1}


class BurgersLevel(StencilLevel):
    def __init__(self, grid, nu, space_order=4, advection="weno5", policy=SolvePolicy()):
        if advection not in ADVECTION:
            raise ValueError(f"unknown advection scheme {advection!r}")
        if advection == "weno5" and grid.n < 16:
            raise ValueError("WENO5 needs at least 16 points")
        super().__init__(grid, lambda g: diffusion_pair(g, nu, space_order), policy=policy)
        self.nu = nu
        self.space_order = space_order
        self.advection = advection
        self._advect = ADVECTION[advection]

    def eval_explicit(self, u, t=None):
        return self._advect(np.asarray(u, dtype=float), self.grid)


@dataclass(frozen=True)
class LevelSpec:
    n_points: int
    space_order: int
    advection: str
    policy: SolvePolicy = SolvePolicy()


def _default_levels():
    return (
        LevelSpec(256, 4, "weno5", SolvePolicy(mode="full", tol=5e-14)),
        LevelSpec(128, 2, "upwind1", SolvePolicy.vcycles(1)),
    )


@dataclass(frozen=True)
class BurgersSetup:
    nu: float = 0.1
    sigma: float = 0.1
    dt: float = 0.01
    nodes: int = 7
    levels: tuple = field(default_factory=_default_levels)
    domain: tuple = (-1.0, 1.0)
    # references
    ref_n_points: int = 1024
    ref_dt: float = 1e-4
    ref_nodes: int = 9
    coll_sweeps: int = 100

    def grid(self, n):
        return Grid1D(n, "periodic", self.domain)


def burgers_initial(grid, sigma=0.1):
    return np.exp(-grid.x ** 2 / sigma ** 2)


def make_burgers_hierarchy(setup, levels=None, nodes=None):
    specs = setup.levels if levels is None else levels
    lv = [BurgersLevel(setup.grid(s.n_points), setup.nu, s.space_order, s.advection, s.policy)
          for s in specs]
    return Hierarchy(lv, make_rule(nodes or setup.nodes))


def _sdc_run(setup, spec, nodes, dt, n_steps, tol, k_max):
    level = BurgersLevel(setup.grid(spec.n_points), setup.nu, spec.space_order, spec.advection,
                         SolvePolicy(mode="full", tol=5e-14))
    hier = Hierarchy([level], make_rule(nodes))
    u0 = burgers_initial(level.grid, setup.sigma)
    cfg = MLSDCConfig(tol=tol, k_max=k_max)
    return level, hier, u0, cfg


def _ode_reference(setup, spec):
    n_steps = int(round(setup.dt / setup.ref_dt))
    level, hier, u0, cfg = _sdc_run(setup, spec, setup.ref_nodes, setup.ref_dt, n_steps, REF_TOL, 50)
    u, stats = run_simulation(hier, u0, 0.0, n_steps, setup.ref_dt, cfg, "sdc")
    if stats.unconverged_steps:
        raise RuntimeError(f"reference run did not converge in steps {stats.unconverged_steps}")
    return level, u


def _collocation_reference(setup, spec):
    level, hier, u0, _ = _sdc_run(setup, spec, setup.nodes, setup.dt, 1, 0.0, setup.coll_sweeps)
    cfg = MLSDCConfig(tol=0.0, k_max=setup.coll_sweeps)
    u, stats, _ = run_step(hier, u0, 0.0, setup.dt, cfg, "sdc")
    return u, stats.residual_history[-1]


def reference_solutions(setup):
    """PDE, ODE and collocation reference solutions at ``t = dt`` for every level.

    Returns a list with one dict per level holding ``pde`` (the high-resolution
    run injected onto the level grid), ``ode`` (the level's own spatial
    discretization with small time steps) and ``coll`` (converged collocation
    solution of the level's discretization), plus ``coll_residual``.
    """
    fine_spec = LevelSpec(setup.ref_n_points, 4, "weno5")
    _, u_pde = _ode_reference(setup, fine_spec)
    out = []
    for spec in setup.levels:
        grid = setup.grid(spec.n_points)
        if setup.ref_n_points % spec.n_points:
            raise ValueError("reference grid must be a refinement of every level grid")
        stride = setup.ref_n_points // spec.n_points
        pde = u_pde[::stride].copy()
        if spec.n_points == setup.ref_n_points and spec.space_order == 4 and spec.advection == "weno5":
            ode = u_pde.copy()
        else:
            _, ode = _ode_reference(setup, spec)
        coll, coll_res = _collocation_reference(setup, spec)
        out.append({"grid": grid, "pde": pde, "ode": ode, "coll": coll, "coll_residual": coll_res})
    return out

