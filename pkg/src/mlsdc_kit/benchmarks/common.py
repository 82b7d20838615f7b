"""Reusable level implementations: scalar test equation and stencil-based PDE levels."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..multigrid import build_multigrid
from ..problem import Level, SolvePolicy, SolverError
from ..spatial import StencilOp, compact4_pair, laplacian_matrix

__all__ = ["DahlquistLevel", "StencilLevel", "HeatLevel", "diffusion_pair"]


class DahlquistLevel(Level):
    """u' = lam_explicit * u + lam_implicit * u for a vector of independent modes."""

    def __init__(self, lam_implicit=-1.0, lam_explicit=0.0, size=1):
        self.lam_i = lam_implicit
        self.lam_e = lam_explicit
        self._size = int(size)

    @property
    def size(self):
        return self._size

    def eval_explicit(self, u, t):
        return self.lam_e * np.asarray(u, dtype=float)

    def eval_implicit(self, u, t):
        return self.lam_i * np.asarray(u, dtype=float)

    def implicit_solve(self, rhs, a, t, guess=None, policy=None):
        return np.asarray(rhs, dtype=float) / (1.0 - a * self.lam_i)


def diffusion_pair(grid, nu, order):
    """``nu`` times the Laplacian: order 2 explicit stencil or order 4 compact pair."""
    if order == 4:
        pair = compact4_pair(grid)
        return StencilOp(A=sp.csr_matrix(nu * pair.A), W=pair.W)
    if order == 2:
        return StencilOp(A=sp.csr_matrix(nu * laplacian_matrix(grid, 2)))
    raise ValueError(f"unsupported diffusion order {order}")


class StencilLevel(Level):
    """Level whose implicit part is the linear operator ``W^{-1} A``.

    ``pair_builder(grid)`` returns the :class:`StencilOp` on any grid of the
    hierarchy; coarse multigrid depths rediscretize through it.  Implicit
    systems ``(W - a A) U = rhs`` are solved by geometric multigrid, either
    to ``policy.tol`` or with a fixed number of V-cycles.
    """

    weight_tol = 1e-14

    def __init__(self, grid, pair_builder, policy=SolvePolicy(), ncomp=1, omega=1.0):
        self.grid = grid
        self.ncomp = ncomp
        self.policy = policy
        self.omega = omega
        self._pair_builder = pair_builder
        self.pair = pair_builder(grid)
        self.has_weight = self.pair.has_weight
        self._solvers = {}
        self._weight_mg = None

    # -- operators ---------------------------------------------------------
    def eval_implicit_tilde(self, u, t=None):
        return self.pair.A @ np.asarray(u, dtype=float)

    def eval_implicit(self, u, t=None):
        au = self.eval_implicit_tilde(u)
        return self.solve_weight(au, self.weight_tol) if self.has_weight else au

    def apply_weight(self, v):
        return self.pair.W @ v if self.has_weight else np.asarray(v, dtype=float)

    def solve_weight(self, b, tol=None):
        if not self.has_weight:
            return np.asarray(b, dtype=float)
        if self._weight_mg is None:
            self._weight_mg = build_multigrid(self.grid, lambda g: self._pair_builder(g).W,
                                              omega=self.omega)
        tol = self.weight_tol if tol is None else tol
        x, res, _ = self._weight_mg.solve(b, tol=tol, max_cycles=200)
        return x

    # -- implicit solves ---------------------------------------------------
    def _system(self, g, a):
        pair = self._pair_builder(g)
        lhs = pair.W if pair.has_weight else sp.identity(g.size, format="csr")
        return sp.csr_matrix(lhs - a * pair.A)

    def solver_for(self, a):
        key = float(a)
        mg = self._solvers.get(key)
        if mg is None:
            mg = build_multigrid(self.grid, lambda g: self._system(g, key), omega=self.omega)
            self._solvers[key] = mg
        return mg

    def implicit_solve(self, rhs, a, t=None, guess=None, policy=None):
        policy = policy or self.policy
        mg = self.solver_for(a)
        rhs = np.asarray(rhs, dtype=float)
        if policy.mode == "fixed_vcycles":
            x = rhs.copy() if guess is None else np.array(guess, dtype=float)
            for _ in range(policy.n_cycles):
                x = mg.vcycle(rhs, x)
            return x
        x, res, cycles = mg.solve(rhs, guess, tol=policy.tol, max_cycles=policy.max_cycles)
        bound = policy.tol * (1.0 + np.max(np.abs(rhs)))
        # a stall close to round-off is accepted; a miss by orders of magnitude is not
        if res > bound and (cycles >= policy.max_cycles or res > 100 * bound):
            raise SolverError(f"implicit solve reached {res:.3e} (bound {bound:.3e})", res)
        return x


class HeatLevel(StencilLevel):
    """u_t = nu * lap(u) (+ optional explicit forcing), fully implicit diffusion."""

    def __init__(self, grid, nu=1.0, order=2, policy=SolvePolicy(), forcing=None):
        super().__init__(grid, lambda g: diffusion_pair(g, nu, order), policy=policy)
        self.nu = nu
        self.order = order
        self.forcing = forcing

    def eval_explicit(self, u, t):
        if self.forcing is None:
            return np.zeros_like(u, dtype=float)
        return np.asarray(self.forcing(self.grid, u, t), dtype=float)
