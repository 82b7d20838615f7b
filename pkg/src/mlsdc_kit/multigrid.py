"""Linear geometric multigrid on uniform periodic / Dirichlet grids.

V(nu1, nu2) cycles with lexicographic SOR smoothing, full-weighting
restriction, linear prolongation and rediscretized coarse operators.  The
coarsest system is solved densely.  Periodic problems whose operator
annihilates constants (Poisson) are handled by projecting the right-hand
side and every coarse correction onto zero mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .spatial import PERIODIC

__all__ = ["Multigrid", "build_multigrid", "full_weighting", "linear_prolongation"]


@numba.njit(cache=True)
def _sor(indptr, indices, data, diag, x, b, omega, sweeps):
    n = x.shape[0]
    for _ in range(sweeps):
        for i in range(n):
            s = b[i]
            for k in range(indptr[i], indptr[i + 1]):
                j = indices[k]
                if j != i:
                    s -= data[k] * x[j]
            x[i] = (1.0 - omega) * x[i] + omega * s / diag[i]


def _fw_1d(grid):
    nc = grid.coarsen().n
    rows, cols, vals = [], [], []
    for j in range(nc):
        if grid.bc == PERIODIC:
            centre = 2 * j
            taps = ((centre - 1) % grid.n, centre, (centre + 1) % grid.n)
        else:
            centre = 2 * j + 1
            taps = (centre - 1, centre, centre + 1)
        rows += [j, j, j]
        cols += list(taps)
        vals += [0.25, 0.5, 0.25]
    return sp.csr_matrix((vals, (rows, cols)), shape=(nc, grid.n))


def full_weighting(grid):
    """Full-weighting restriction matrix from ``grid`` to ``grid.coarsen()``."""
    if grid.ndim == 1:
        return _fw_1d(grid)
    rx, ry = (_fw_1d(g) for g in grid.axes)
    return sp.kron(rx, ry, format="csr")


def linear_prolongation(grid):
    """Linear interpolation from ``grid.coarsen()`` to ``grid``."""
    if grid.ndim == 1:
        return sp.csr_matrix(2.0 * _fw_1d(grid).T)
    px, py = (sp.csr_matrix(2.0 * _fw_1d(g).T) for g in grid.axes)
    return sp.kron(px, py, format="csr")


@dataclass
class _Depth:
    op: sp.csr_matrix
    diag: np.ndarray
    restrict: sp.csr_matrix | None = None
    prolong: sp.csr_matrix | None = None


class Multigrid:
    """Geometric multigrid hierarchy for one linear operator.

    Parameters
    ----------
    ops : list of sparse matrices, finest first
    restrictions, prolongations : transfer matrices between depth d and d+1
    omega : SOR relaxation factor (1.0 is Gauss-Seidel)
    pre, post : smoothing sweeps per depth
    singular : operator has constants in its null space (periodic Poisson)
    """

    def __init__(self, ops, restrictions, prolongations, omega=1.0, pre=2, post=2,
                 singular=False):
        if len(ops) < 1 or len(restrictions) != len(ops) - 1:
            raise ValueError("need one operator per depth and transfers between depths")
        self.omega = float(omega)
        self.pre = int(pre)
        self.post = int(post)
        self.singular = bool(singular)
        self.depths = []
        for d, op in enumerate(ops):
            op = sp.csr_matrix(op)
            op.sort_indices()
            r = restrictions[d] if d < len(restrictions) else None
            p = prolongations[d] if d < len(prolongations) else None
            self.depths.append(_Depth(op=op, diag=op.diagonal().copy(), restrict=r, prolong=p))
        coarse = self.depths[-1].op.toarray()
        if self.singular:
            self._coarse_inv = np.linalg.pinv(coarse)
            self._coarse_lu = None
        else:
            self._coarse_lu = sla.lu_factor(coarse)
            self._coarse_inv = None

    @property
    def op(self):
        return self.depths[0].op

    @property
    def n(self):
        return self.op.shape[0]

    def _project(self, v):
        if self.singular:
            v -= v.mean()
        return v

    def _coarse_solve(self, b):
        if self._coarse_lu is not None:
            return sla.lu_solve(self._coarse_lu, b)
        return self._project(self._coarse_inv @ (b - b.mean()))

    def smooth(self, d, x, b, sweeps):
        lvl = self.depths[d]
        _sor(lvl.op.indptr, lvl.op.indices, lvl.op.data, lvl.diag, x, b, self.omega, sweeps)

    def _cycle(self, d, x, b):
        if d == len(self.depths) - 1:
            return self._coarse_solve(b)
        lvl = self.depths[d]
        self.smooth(d, x, b, self.pre)
        r = b - lvl.op @ x
        rc = self._project(lvl.restrict @ r)
        ec = self._cycle(d + 1, np.zeros_like(rc), rc)
        x += self._project(lvl.prolong @ ec)
        self.smooth(d, x, b, self.post)
        return x

    def vcycle(self, b, x0=None):
        """One V-cycle starting from ``x0`` (zeros by default); returns a new array."""
        b = np.array(b, dtype=float)
        self._project(b)
        x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
        x = self._cycle(0, x, b)
        return self._project(x)

    def residual_norm(self, b, x):
        return float(np.max(np.abs(b - self.op @ x))) if b.size else 0.0

    def solve(self, b, x0=None, tol=1e-12, max_cycles=100):
        """Iterate V-cycles until ``||b - A x||_inf <= tol (1 + ||b||_inf)``.

        Returns ``(x, achieved_residual, cycles_used)``.  Stalls (less than
        5% residual reduction over one cycle) and the cycle cap end the
        iteration without raising.
        """
        b = np.array(b, dtype=float)
        self._project(b)
        x = np.zeros_like(b) if x0 is None else self._project(np.array(x0, dtype=float))
        bound = tol * (1.0 + (np.max(np.abs(b)) if b.size else 0.0))
        res = self.residual_norm(b, x)
        cycles = 0
        while res > bound and cycles < max_cycles:
            x = self._project(self._cycle(0, x, b))
            cycles += 1
            new = self.residual_norm(b, x)
            stalled = new > 0.95 * res
            res = new
            if stalled:
                break
        return x, res, cycles


def build_multigrid(grid, assemble, min_points=4, omega=1.0, pre=2, post=2,
                    singular=False, max_coarse=None):
    """Build a hierarchy by rediscretizing ``assemble(grid)`` on coarser grids.

    Coarsening stops when the grid cannot be halved any more or the
    system has at most ``max_coarse`` unknowns.
    """
    if max_coarse is None:
        max_coarse = 8**grid.ndim
    ops, rs, ps = [assemble(grid)], [], []
    g = grid
    while g.size > max_coarse and g.can_coarsen(min_points):
        rs.append(full_weighting(g))
        ps.append(linear_prolongation(g))
        g = g.coarsen()
        ops.append(assemble(g))
    return Multigrid(ops, rs, ps, omega=omega, pre=pre, post=post, singular=singular)
