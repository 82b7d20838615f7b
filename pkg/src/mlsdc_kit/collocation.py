"""Gauss-Lobatto collocation nodes and spectral integration matrices.

All matrices live on the unit interval [0, 1]; the timestep length is
applied at the call site (``integrate_q`` / ``integrate_s``), so a single
rule can be shared by every step and every level of a hierarchy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadratureRule",
    "lobatto_nodes",
    "build_q",
    "build_s",
    "integrate_q",
    "integrate_s",
    "make_rule",
]


def _legendre_and_derivs(n, x):
    """Return P_n(x), P_n'(x), P_n''(x) for scalar x in (-1, 1)."""
    p_prev, p = 1.0, x
    if n == 0:
        return 1.0, 0.0, 0.0
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    d2p = (2.0 * x * dp - n * (n + 1) * p) / (1.0 - x * x)
    return p, dp, d2p


def _safeguarded_root(degree, lo, hi, tol=1e-15, maxiter=200):
    # Newton on P'_degree, bisection whenever the step leaves [lo, hi].
    f_lo = _legendre_and_derivs(degree, lo)[1]
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        _, f, df = _legendre_and_derivs(degree, x)
        if f == 0.0:
            return x
        if np.sign(f) == np.sign(f_lo):
            lo, f_lo = x, f
        else:
            hi = x
        step = f / df if df != 0.0 else np.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * max(1.0, abs(x)) or hi - lo <= tol:
            return x_new
        x = x_new
    return x


def lobatto_nodes(m_plus_1):
    """Gauss-Lobatto nodes on [0, 1] (``m_plus_1`` of them, ascending)."""
    m_plus_1 = int(m_plus_1)
    if m_plus_1 < 2:
        raise ValueError(f"need at least 2 Lobatto nodes, got {m_plus_1}")
    M = m_plus_1 - 1
    interior = []
    if M >= 2:
        # interior nodes are the roots of P'_M; bracket them by sign changes
        grid = -np.cos(np.linspace(0.0, np.pi, 64 * M + 1))[1:-1]
        vals = np.array([_legendre_and_derivs(M, x)[1] for x in grid])
        for i in np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]:
            interior.append(_safeguarded_root(M, grid[i], grid[i + 1]))
        if M % 2 == 0:
            # middle root sits exactly at 0 and may coincide with a grid point
            interior = [x for x in interior if abs(x) > 1e-12] + [0.0]
        interior = sorted(interior)
        if len(interior) != M - 1:
            raise RuntimeError(f"found {len(interior)} interior nodes, expected {M - 1}")
    x = np.array([-1.0] + interior + [1.0])
    x = 0.5 * (x - x[::-1])  # enforce exact symmetry
    t = 0.5 * (x + 1.0)
    t[0], t[-1] = 0.0, 1.0
    return t


def _barycentric_weights(nodes):
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def _lagrange_basis(nodes, x):
    """Matrix L[i, j] = l_j(x_i)."""
    w = _barycentric_weights(nodes)
    x = np.asarray(x, dtype=float)
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff[exact] = 1.0
    terms = w[None, :] / diff
    L = terms / terms.sum(axis=1, keepdims=True)
    rows = exact.any(axis=1)
    L[rows] = exact[rows].astype(float)
    return L


def build_q(nodes):
    """Cumulative integration matrix: q[m, j] = int_0^{nodes[m]} l_j(s) ds."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 2:
        raise ValueError("nodes must be a 1D array with at least two entries")
    if np.any(np.diff(nodes) <= 0.0):
        raise ValueError("nodes must be strictly increasing (no duplicates)")
    n = nodes.size
    # Gauss-Legendre with n points is exact to degree 2n-1 >= n-1
    gx, gw = np.polynomial.legendre.leggauss(n)
    q = np.zeros((n, n))
    for m in range(n):
        a, b = nodes[0], nodes[m]
        if b == a:
            continue
        x = 0.5 * (b - a) * (gx + 1.0) + a
        q[m] = 0.5 * (b - a) * gw @ _lagrange_basis(nodes, x)
    return q


def build_s(q):
    """Node-to-node integration matrix, s[m] = q[m + 1] - q[m]."""
    q = np.asarray(q, dtype=float)
    return q[1:] - q[:-1]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Lobatto nodes plus the cumulative (q) and node-to-node (s) matrices."""

    nodes: np.ndarray
    q: np.ndarray
    s: np.ndarray

    @property
    def m_plus_1(self):
        return self.nodes.size

    @property
    def num_substeps(self):
        return self.nodes.size - 1

    @property
    def delta(self):
        """Substep lengths on the unit interval."""
        return np.diff(self.nodes)


@lru_cache(maxsize=None)
def make_rule(m_plus_1):
    nodes = lobatto_nodes(m_plus_1)
    q = build_q(nodes)
    for a in (nodes, q):
        a.setflags(write=False)
    s = build_s(q)
    s.setflags(write=False)
    return QuadratureRule(nodes=nodes, q=q, s=s)


def _as_node_array(node_values, expected):
    try:
        arr = np.asarray(node_values, dtype=float)
    except ValueError as exc:  # ragged nested sequences
        raise ValueError("node values must all have the same length") from exc
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] != expected:
        raise ValueError(f"expected {expected} node values, got {arr.shape[0]}")
    return arr


def integrate_q(rule, node_values, dt):
    """dt * (q applied node-wise); row 0 is identically zero."""
    arr = _as_node_array(node_values, rule.m_plus_1)
    shape = arr.shape
    out = dt * (rule.q @ arr.reshape(shape[0], -1))
    return out.reshape(shape)


def integrate_s(rule, node_values, dt):
    """dt * (s applied node-wise); entry m approximates the integral over substep m."""
    arr = _as_node_array(node_values, rule.m_plus_1)
    shape = arr.shape
    out = dt * (rule.s @ arr.reshape(shape[0], -1))
    return out.reshape((shape[0] - 1,) + shape[1:])
