"""Level contract, solver policies, level hierarchies and spatial transfer.

A *level* is one rung of the MLSDC hierarchy: an IMEX-split right-hand
side ``f = f_E + f_I`` plus the solver for ``U - a f_I(U) = rhs``.  Levels
whose implicit part comes from a compact stencil carry a weighting matrix
``W`` and ``f_I = W^{-1} A``; they solve the weighted system
``(W - a A) U = rhs_W`` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .collocation import QuadratureRule
from .spatial import PERIODIC

__all__ = [
    "SolvePolicy",
    "SolverError",
    "Level",
    "Hierarchy",
    "restrict",
    "interpolate",
    "interpolation_matrix",
]


class SolverError(RuntimeError):
    """An implicit solve under the ``full`` policy missed its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class SolvePolicy:
    """How accurately implicit systems are solved on a level.

    ``mode="full"`` iterates to ``tol``; ``mode="fixed_vcycles"`` performs
    exactly ``n_cycles`` V-cycles from the supplied initial guess.
    """

    mode: str = "full"
    n_cycles: int = 1
    tol: float = 1e-12
    max_cycles: int = 100

    def __post_init__(self):
        if self.mode not in ("full", "fixed_vcycles"):
            raise ValueError(f"unknown solve mode {self.mode!r}")
        if self.mode == "fixed_vcycles" and self.n_cycles < 1:
            raise ValueError("fixed_vcycles needs n_cycles >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    @classmethod
    def vcycles(cls, n):
        return cls(mode="fixed_vcycles", n_cycles=n)


class Level:
    """Base class for one discretization level.

    Subclasses implement ``eval_explicit``, ``eval_implicit`` and
    ``implicit_solve``; weighted levels additionally override
    ``eval_implicit_tilde``, ``apply_weight``, ``solve_weight`` and set
    ``has_weight``.  ``grid`` (or None for ODEs) and ``ncomp`` describe the
    layout of the flat state vector for spatial transfer.
    """

    has_weight = False
    grid = None
    ncomp = 1
    policy = SolvePolicy()

    @property
    def size(self):
        return self.ncomp * (1 if self.grid is None else self.grid.size)

    def eval_explicit(self, u, t):
        return np.zeros_like(u)

    def eval_implicit(self, u, t):
        return np.zeros_like(u)

    def eval_implicit_tilde(self, u, t=None):
        return self.eval_implicit(u, t)

    def apply_weight(self, v):
        return v

    def solve_weight(self, b, tol=1e-14):
        return b

    def implicit_solve(self, rhs, a, t, guess=None, policy=None):
        """Solve ``U - a f_I(U, t) = rhs`` (weighted levels: ``(W - a A) U = rhs``)."""
        return np.array(rhs, dtype=float)


@dataclass
class Hierarchy:
    """Levels ordered finest first, sharing one quadrature rule."""

    levels: list
    rule: QuadratureRule
    sweeps_per_level: list = field(default=None)

    def __post_init__(self):
        if not self.levels:
            raise ValueError("hierarchy needs at least one level")
        if self.sweeps_per_level is None:
            self.sweeps_per_level = [1] * len(self.levels)
        if len(self.sweeps_per_level) != len(self.levels):
            raise ValueError("one sweep count per level required")
        for fine, coarse in zip(self.levels[:-1], self.levels[1:]):
            _check_transfer(fine, coarse)

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]


# ---------------------------------------------------------------------------
# transfer between levels

def _check_transfer(fine, coarse):
    if fine.ncomp != coarse.ncomp:
        raise ValueError("levels differ in number of components")
    gf, gc = fine.grid, coarse.grid
    if (gf is None) != (gc is None):
        raise ValueError("cannot transfer between gridded and grid-free levels")
    if gf is None:
        if fine.size != coarse.size:
            raise ValueError("grid-free levels must have equal size")
        return
    if gf.ndim != gc.ndim or gf.bc != gc.bc:
        raise ValueError("incompatible grids")
    for nf, nc in zip(gf.shape, gc.shape):
        if nf == nc:
            continue
        ok = nf == 2 * nc if gf.bc == PERIODIC else nf == 2 * nc + 1
        if not ok:
            raise ValueError(f"grid sizes {gf.shape} and {gc.shape} are not nested")


def _restrict_axis(a, axis, nf, nc, bc):
    if nf == nc:
        return a
    sl = [slice(None)] * a.ndim
    sl[axis] = slice(0, None, 2) if bc == PERIODIC else slice(1, None, 2)
    return a[tuple(sl)]


def restrict(u, fine_level, coarse_level):
    """Injection of coincident points, component by component."""
    _check_transfer(fine_level, coarse_level)
    u = np.asarray(u, dtype=float)
    gf, gc = fine_level.grid, coarse_level.grid
    if gf is None or gf.shape == gc.shape:
        return u.copy()
    if u.size != fine_level.size:
        raise ValueError(f"state has {u.size} entries, level expects {fine_level.size}")
    a = u.reshape((fine_level.ncomp,) + gf.shape)
    for ax, (nf, nc) in enumerate(zip(gf.shape, gc.shape)):
        a = _restrict_axis(a, ax + 1, nf, nc, gf.bc)
    return np.ascontiguousarray(a).reshape(-1)


def _lagrange_weights(nodes, x):
    w = np.ones(len(nodes))
    for j, xj in enumerate(nodes):
        for k, xk in enumerate(nodes):
            if k != j:
                w[j] *= (x - xk) / (xj - xk)
    return w


@lru_cache(maxsize=None)
def interpolation_matrix(n_coarse, bc, degree):
    """Sparse 1D Lagrange interpolation from a coarse to a twice-finer grid.

    Coincident points are copied; each midpoint uses the ``degree + 1``
    nearest coarse points (periodic wrap-around, or one-sided stencils that
    include the zero boundary values for Dirichlet grids).
    """
    if degree < 1 or degree % 2 == 0:
        raise ValueError("interpolation degree must be odd and positive")
    half = (degree + 1) // 2
    rows, cols, vals = [], [], []
    if bc == PERIODIC:
        n_fine = 2 * n_coarse
        if degree + 1 > n_coarse:
            raise ValueError("grid too small for interpolation degree")
        for j in range(n_coarse):
            rows.append(2 * j)
            cols.append(j)
            vals.append(1.0)
            # midpoint between coarse j and j+1 sits at coarse coordinate j + 1/2
            nodes = np.arange(j - half + 1, j + half + 1)
            w = _lagrange_weights(nodes, j + 0.5)
            rows += [2 * j + 1] * len(nodes)
            cols += [int(c) % n_coarse for c in nodes]
            vals += list(w)
    else:
        n_fine = 2 * n_coarse + 1
        # coarse coordinates -1 and n_coarse are the (zero) boundary points
        if degree + 1 > n_coarse + 2:
            raise ValueError("grid too small for interpolation degree")
        for j in range(n_coarse):
            rows.append(2 * j + 1)
            cols.append(j)
            vals.append(1.0)
        for j in range(n_coarse + 1):
            x = j - 0.5
            start = min(max(j - half, -1), n_coarse - degree)
            nodes = np.arange(start, start + degree + 1)
            w = _lagrange_weights(nodes, x)
            for c, wc in zip(nodes, w):
                if 0 <= c < n_coarse:
                    rows.append(2 * j)
                    cols.append(int(c))
                    vals.append(wc)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_fine, n_coarse))


def interpolate(u, coarse_level, fine_level, order=3):
    """Lagrange interpolation of degree ``order`` from coarse to fine grid."""
    _check_transfer(fine_level, coarse_level)
    u = np.asarray(u, dtype=float)
    gf, gc = fine_level.grid, coarse_level.grid
    if gf is None or gf.shape == gc.shape:
        return u.copy()
    if u.size != coarse_level.size:
        raise ValueError(f"state has {u.size} entries, level expects {coarse_level.size}")
    a = u.reshape((coarse_level.ncomp,) + gc.shape)
    for ax, (nf, nc) in enumerate(zip(gf.shape, gc.shape)):
        if nf == nc:
            continue
        P = interpolation_matrix(nc, gf.bc, order)
        a = np.moveaxis(a, ax + 1, 0)
        shp = a.shape
        a = (P @ a.reshape(shp[0], -1)).reshape((P.shape[0],) + shp[1:])
        a = np.moveaxis(a, 0, ax + 1)
    return np.ascontiguousarray(a).reshape(-1)
