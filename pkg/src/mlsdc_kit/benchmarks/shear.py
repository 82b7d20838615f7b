"""2D doubly periodic shear layer in vorticity form.

``omega_t = -u . grad(omega) + nu lap(omega)`` with the velocity obtained
from the streamfunction, ``-lap(psi) = omega`` and ``u = (psi_y, -psi_x)``.
Advection is explicit, diffusion implicit.  Both the Poisson problem and
the implicit systems are solved with geometric multigrid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ..collocation import make_rule
from ..multigrid import build_multigrid
from ..problem import Hierarchy, SolvePolicy
from ..spatial import Grid2D, compact4_pair, curl, d1_centered, laplacian_matrix, velocity_from_streamfunction
from .common import StencilLevel, diffusion_pair

__all__ = [
    "ShearLevel",
    "ShearSetup",
    "SHEAR_VARIANTS",
    "make_shear_hierarchy",
    "shear_initial_velocity",
    "shear_initial_vorticity",
]

# coarse level per variant: (grid divisor, order, implicit solve policy)
SHEAR_VARIANTS = {
    "1,2": (2, 2, SolvePolicy(mode="full", tol=1e-14)),
    "1,2,3(1)": (2, 2, SolvePolicy.vcycles(1)),
    "1,2,3(2)": (2, 2, SolvePolicy.vcycles(2)),
    "2,3(1)": (1, 2, SolvePolicy.vcycles(1)),
}


def _poisson_pair(grid, order):
    """Return ``(lhs, rhs_weight)`` so that ``lhs psi = rhs_weight omega`` approximates -lap psi = omega."""
    if order == 4:
        pair = compact4_pair(grid)
        return sp.csr_matrix(-pair.A), pair.W
    return sp.csr_matrix(-laplacian_matrix(grid, order)), None


class ShearLevel(StencilLevel):
    """Vorticity level of order 2 or 4 on a doubly periodic grid."""

    def __init__(self, grid, nu, space_order=4, policy=SolvePolicy(), poisson_tol=1e-15):
        super().__init__(grid, lambda g: diffusion_pair(g, nu, space_order), policy=policy)
        self.nu = nu
        self.space_order = space_order
        self.poisson_tol = poisson_tol
        self._poisson_w = _poisson_pair(grid, space_order)[1]
        self.poisson = build_multigrid(grid, lambda g: _poisson_pair(g, space_order)[0], singular=True)
        self._psi = None

    def streamfunction(self, omega):
        w = np.asarray(omega, dtype=float)
        b = self._poisson_w @ w if self._poisson_w is not None else w
        psi, _, _ = self.poisson.solve(b, self._psi, tol=self.poisson_tol, max_cycles=100)
        # warm start for the next evaluation; only affects round-off
        self._psi = psi
        return psi

    def velocity(self, omega):
        psi = self.streamfunction(omega)
        return velocity_from_streamfunction(psi, self.grid, self.space_order)

    def eval_explicit(self, u, t=None):
        w = np.asarray(u, dtype=float)
        u1, u2 = self.velocity(w)
        p, g = self.space_order, self.grid
        return -(u1 * d1_centered(w, g, p, axis=0) + u2 * d1_centered(w, g, p, axis=1))


@dataclass(frozen=True)
class ShearSetup:
    n_points: int = 128
    nu: float = 1e-3
    rho: float = 50.0
    delta: float = 0.05
    nodes: int = 9
    dt: float = 1.0 / 256
    n_steps: int = 256
    tol: float = 1e-12
    fine_order: int = 4
    fine_solve_tol: float = 1e-15


def shear_initial_velocity(grid, rho=50.0, delta=0.05):
    x, y = grid.mesh()
    u1 = -1.0 + np.tanh(rho * (0.5 - y)) + np.tanh(rho * (y - 0.25))
    u2 = -delta * np.sin(2 * np.pi * (x + 0.25))
    return u1.ravel(), u2.ravel()


def shear_initial_vorticity(grid, rho=50.0, delta=0.05, order=4):
    """Discrete curl of the sampled initial velocity, projected to zero mean."""
    u1, u2 = shear_initial_velocity(grid, rho, delta)
    w = curl(u1, u2, grid, order)
    return w - w.mean()


def make_shear_hierarchy(setup, variant=None):
    """Fine level plus the coarse level of ``variant`` (None gives single-level SDC)."""
    grid = Grid2D(setup.n_points, setup.n_points)
    fine = ShearLevel(grid, setup.nu, setup.fine_order, SolvePolicy(mode="full", tol=setup.fine_solve_tol))
    levels = [fine]
    if variant is not None:
        if variant not in SHEAR_VARIANTS:
            raise ValueError(f"unknown shear variant {variant!r}; choose from {sorted(SHEAR_VARIANTS)}")
        div, order, policy = SHEAR_VARIANTS[variant]
        cgrid = grid if div == 1 else grid.coarsen()
        levels.append(ShearLevel(cgrid, setup.nu, order, policy))
    return Hierarchy(levels, make_rule(setup.nodes))
