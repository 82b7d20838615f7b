"""Finite-difference operators on uniform 1D and 2D grids.

Periodic grids store ``x_i = a + i*h`` for ``i = 0..n-1``; homogeneous
Dirichlet grids store only the interior points ``x_i = a + (i+1)*h`` and
treat ghost values as zero.  2D fields are flattened in C order with x as
the leading axis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Grid1D",
    "Grid2D",
    "StencilOp",
    "d1_centered",
    "laplacian",
    "laplacian_matrix",
    "d1_matrix",
    "compact4_pair",
    "advect_upwind1",
    "advect_weno5",
    "burgers_flux",
    "curl",
    "velocity_from_streamfunction",
    "shear2d_rhs",
]

PERIODIC = "periodic"
DIRICHLET = "dirichlet0"


@dataclass(frozen=True)
class Grid1D:
    n: int
    bc: str = PERIODIC
    domain: tuple = (0.0, 1.0)

    def __post_init__(self):
        if self.bc not in (PERIODIC, DIRICHLET):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        if self.n < 4:
            raise ValueError(f"grid needs at least 4 points, got {self.n}")
        if self.domain[1] <= self.domain[0]:
            raise ValueError("empty domain")

    ndim = 1

    @property
    def shape(self):
        return (self.n,)

    @property
    def size(self):
        return self.n

    @property
    def length(self):
        return self.domain[1] - self.domain[0]

    @property
    def h(self):
        if self.bc == PERIODIC:
            return self.length / self.n
        return self.length / (self.n + 1)

    @property
    def x(self):
        a = self.domain[0]
        if self.bc == PERIODIC:
            return a + self.h * np.arange(self.n)
        return a + self.h * np.arange(1, self.n + 1)

    def can_coarsen(self, min_points=4):
        if self.bc == PERIODIC:
            return self.n % 2 == 0 and self.n // 2 >= min_points
        return self.n % 2 == 1 and (self.n - 1) // 2 >= min_points - 1

    def coarsen(self):
        if self.bc == PERIODIC:
            if self.n % 2:
                raise ValueError(f"cannot halve periodic grid with n={self.n}")
            return Grid1D(self.n // 2, self.bc, self.domain)
        if self.n % 2 == 0:
            raise ValueError(f"Dirichlet grid coarsening needs odd n, got {self.n}")
        return Grid1D((self.n - 1) // 2, self.bc, self.domain)


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid with the same boundary condition on both axes."""

    nx: int
    ny: int
    bc: str = PERIODIC
    domain: tuple = ((0.0, 1.0), (0.0, 1.0))

    ndim = 2

    @cached_property
    def axes(self):
        return (Grid1D(self.nx, self.bc, tuple(self.domain[0])),
                Grid1D(self.ny, self.bc, tuple(self.domain[1])))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def h(self):
        hx, hy = self.axes[0].h, self.axes[1].h
        if not np.isclose(hx, hy, rtol=1e-12):
            raise ValueError("operator requires equal spacing in x and y")
        return hx

    def mesh(self):
        return np.meshgrid(self.axes[0].x, self.axes[1].x, indexing="ij")

    def can_coarsen(self, min_points=4):
        return all(g.can_coarsen(min_points) for g in self.axes)

    def coarsen(self):
        gx, gy = (g.coarsen() for g in self.axes)
        return Grid2D(gx.n, gy.n, self.bc, self.domain)


@dataclass(frozen=True, eq=False)
class StencilOp:
    """Linear operator ``W^{-1} A``; ``W`` is None for explicit stencils."""

    A: sp.csr_matrix
    W: sp.csr_matrix | None = None

    @property
    def has_weight(self):
        return self.W is not None


# ---------------------------------------------------------------------------
# matrix assembly

def _band_matrix(grid, offsets, coeffs):
    n = grid.n
    if grid.bc == PERIODIC:
        rows, cols, vals = [], [], []
        idx = np.arange(n)
        for off, c in zip(offsets, coeffs):
            rows.append(idx)
            cols.append((idx + off) % n)
            vals.append(np.full(n, c, dtype=float))
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
        return mat.tocsr()
    diags = [np.full(n - abs(o), c, dtype=float) for o, c in zip(offsets, coeffs)]
    return sp.diags(diags, list(offsets), shape=(n, n), format="csr")


def _second_difference(g):
    return _band_matrix(g, (-1, 0, 1), (1.0, -2.0, 1.0)) / g.h**2


def laplacian_matrix(grid, order=2):
    """Sparse standard Laplacian of order 2 or 4 (explicit stencils)."""
    if order not in (2, 4):
        raise ValueError(f"unsupported Laplacian order {order}")
    if grid.ndim == 1:
        if order == 2:
            return _second_difference(grid)
        return _band_matrix(
            grid, (-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)
        ) / grid.h**2
    gx, gy = grid.axes
    lx = laplacian_matrix(gx, order)
    ly = laplacian_matrix(gy, order)
    return (sp.kron(lx, sp.identity(gy.n)) + sp.kron(sp.identity(gx.n), ly)).tocsr()


def compact4_pair(grid):
    """Fourth-order compact (Mehrstellen) Laplacian as a (W, A) pair.

    1D: W = (1, 10, 1)/12, A = (1, -2, 1)/h^2.
    2D: W = I + h^2/12 L5 (centre 8/12, edges 1/12) and the nine-point
    A = [[1, 4, 1], [4, -20, 4], [1, 4, 1]] / (6 h^2).
    """
    if grid.ndim == 1:
        W = _band_matrix(grid, (-1, 0, 1), (1 / 12, 10 / 12, 1 / 12))
        return StencilOp(A=_second_difference(grid), W=W)
    gx, gy = grid.axes
    h = grid.h
    dxx, dyy = _second_difference(gx), _second_difference(gy)
    ix, iy = sp.identity(gx.n), sp.identity(gy.n)
    l5 = sp.kron(dxx, iy) + sp.kron(ix, dyy)
    A = l5 + h**2 / 6 * sp.kron(dxx, dyy)
    W = sp.identity(grid.size) + h**2 / 12 * l5
    return StencilOp(A=sp.csr_matrix(A), W=sp.csr_matrix(W))


# ---------------------------------------------------------------------------
# explicit stencils (periodic, matrix free)

_D1 = {
    2: ((1, 1 / 2), (-1, -1 / 2)),
    4: ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12)),
}


def d1_centered(u, grid, order=2, axis=0):
    """Centered first derivative along ``axis`` on a periodic grid."""
    if order not in _D1:
        raise ValueError(f"unsupported derivative order {order}")
    if grid.bc != PERIODIC:
        raise ValueError("d1_centered is implemented for periodic grids only")
    field = np.reshape(u, grid.shape)
    h = grid.h if grid.ndim == 1 else grid.axes[axis].h
    out = np.zeros_like(field, dtype=float)
    for off, c in _D1[order]:
        out += c * np.roll(field, -off, axis=axis)
    return (out / h).reshape(np.shape(u))


def d1_matrix(grid, order=2):
    """Sparse centered first derivative (1D)."""
    if order not in _D1:
        raise ValueError(f"unsupported derivative order {order}")
    offsets, coeffs = zip(*_D1[order])
    return _band_matrix(grid, offsets, coeffs) / grid.h


def laplacian(u, grid, order=2):
    return laplacian_matrix(grid, order) @ np.asarray(u, dtype=float)


def burgers_flux(u):
    return 0.5 * u * u


def advect_upwind1(u, grid, speed=None):
    """First-order upwind tendency ``-d/dx F(u)`` (periodic, 1D).

    With ``speed`` given the flux is linear (``speed * u``); otherwise the
    Burgers flux ``u^2/2`` with a local Lax-Friedrichs (Rusanov) split.
    """
    u = np.asarray(u, dtype=float)
    up = np.roll(u, -1)
    if speed is None:
        alpha = np.maximum(np.abs(u), np.abs(up))
        flux = 0.5 * (burgers_flux(u) + burgers_flux(up)) - 0.5 * alpha * (up - u)
    else:
        c = np.broadcast_to(np.asarray(speed, dtype=float), u.shape)
        cf = 0.5 * (c + np.roll(c, -1))
        flux = np.where(cf >= 0.0, cf * u, cf * up)
    return -(flux - np.roll(flux, 1)) / grid.h


def _weno5_face(v1, v2, v3, v4, v5, eps):
    # reconstruction at the face between v3 and v4, biased towards v3
    b0 = 13 / 12 * (v1 - 2 * v2 + v3) ** 2 + 0.25 * (v1 - 4 * v2 + 3 * v3) ** 2
    b1 = 13 / 12 * (v2 - 2 * v3 + v4) ** 2 + 0.25 * (v2 - v4) ** 2
    b2 = 13 / 12 * (v3 - 2 * v4 + v5) ** 2 + 0.25 * (3 * v3 - 4 * v4 + v5) ** 2
    a0 = 0.1 / (eps + b0) ** 2
    a1 = 0.6 / (eps + b1) ** 2
    a2 = 0.3 / (eps + b2) ** 2
    q0 = (2 * v1 - 7 * v2 + 11 * v3) / 6
    q1 = (-v2 + 5 * v3 + 2 * v4) / 6
    q2 = (2 * v3 + 5 * v4 - v5) / 6
    return (a0 * q0 + a1 * q1 + a2 * q2) / (a0 + a1 + a2)


def advect_weno5(u, grid, speed=None, eps=1e-6):
    """Fifth-order WENO tendency ``-d/dx F(u)`` with global Lax-Friedrichs splitting.

    ``speed=None`` selects the Burgers flux; a scalar speed gives linear
    advection.  Periodic 1D grids with n >= 16.
    """
    u = np.asarray(u, dtype=float)
    if grid.n < 16:
        raise ValueError("WENO5 needs at least 16 points")
    if speed is None:
        f = burgers_flux(u)
        alpha = np.max(np.abs(u))
    else:
        f = speed * u
        alpha = abs(speed)
    fp = 0.5 * (f + alpha * u)
    fm = 0.5 * (f - alpha * u)
    r = lambda a, k: np.roll(a, -k)  # noqa: E731  r(a, k)[i] = a[i + k]
    face = _weno5_face(r(fp, -2), r(fp, -1), fp, r(fp, 1), r(fp, 2), eps)
    face += _weno5_face(r(fm, 3), r(fm, 2), r(fm, 1), fm, r(fm, -1), eps)
    return -(face - np.roll(face, 1)) / grid.h


# ---------------------------------------------------------------------------
# 2D vorticity / streamfunction helpers

def curl(u1, u2, grid, order):
    """Discrete vorticity du2/dx - du1/dy."""
    return d1_centered(u2, grid, order, axis=0) - d1_centered(u1, grid, order, axis=1)


def velocity_from_streamfunction(psi, grid, order):
    """(u, v) = (dpsi/dy, -dpsi/dx)."""
    return d1_centered(psi, grid, order, axis=1), -d1_centered(psi, grid, order, axis=0)


def shear2d_rhs(omega, grid, order, nu, poisson_solve):
    """Split right-hand side of the 2D vorticity equation.

    ``poisson_solve(omega)`` must return the zero-mean streamfunction with
    ``-lap(psi) = omega``.  Returns ``(f_explicit, f_implicit)`` as flat
    arrays; the implicit part applies ``W^{-1} A`` exactly (dense-free, via
    sparse LU) and is meant for inspection, not for the time loop.
    """
    w = np.asarray(omega, dtype=float).reshape(grid.shape)
    mean = w.mean()
    if abs(mean) > 1e-10 * max(1.0, np.abs(w).max()):
        warnings.warn("vorticity has non-zero mean; projecting", RuntimeWarning, stacklevel=2)
        w = w - mean
    psi = np.reshape(poisson_solve(w.ravel()), grid.shape)
    u, v = velocity_from_streamfunction(psi, grid, order)
    fe = -(u * d1_centered(w, grid, order, axis=0) + v * d1_centered(w, grid, order, axis=1))
    if order == 4:
        pair = compact4_pair(grid)
        from scipy.sparse.linalg import spsolve

        fi = nu * spsolve(pair.W.tocsc(), pair.A @ w.ravel())
    else:
        fi = nu * (laplacian_matrix(grid, order) @ w.ravel())
    return fe.ravel(), np.asarray(fi).ravel()
