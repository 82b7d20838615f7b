"""1D wave equation as the first-order system u_t + v_x = 0, v_t + u_x = 0.

The whole right-hand side is treated implicitly; ``U - a J U = rhs`` is
solved with a sparse LU factorization cached per coefficient ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..collocation import make_rule
from ..problem import Hierarchy, Level, SolvePolicy
from ..spatial import Grid1D, d1_matrix

__all__ = ["WaveLevel", "WaveSetup", "make_wave_hierarchy", "wave_initial", "wave_energy"]


class WaveLevel(Level):
    ncomp = 2

    def __init__(self, grid, space_order=4):
        self.grid = grid
        self.space_order = space_order
        self.policy = SolvePolicy()
        d = d1_matrix(grid, space_order)
        self.J = sp.bmat([[None, -d], [-d, None]], format="csc")
        self._lu = {}

    def eval_explicit(self, u, t=None):
        return np.zeros_like(u, dtype=float)

    def eval_implicit(self, u, t=None):
        return self.J @ np.asarray(u, dtype=float)

    def implicit_solve(self, rhs, a, t=None, guess=None, policy=None):
        key = float(a)
        lu = self._lu.get(key)
        if lu is None:
            lu = splu((sp.identity(self.size, format="csc") - key * self.J).tocsc())
            self._lu[key] = lu
        return lu.solve(np.asarray(rhs, dtype=float))


@dataclass(frozen=True)
class WaveSetup:
    fine_points: int = 128
    fine_order: int = 4
    coarse_points: int = 64
    coarse_order: int = 2
    dt: float = 0.025
    n_steps: int = 40
    tol: float = 5e-8
    width: float = 0.1


def wave_initial(grid, width=0.1):
    u = np.exp(-0.5 * ((grid.x - 0.5) / width) ** 2)
    return np.concatenate([u, np.zeros_like(u)])


def wave_energy(state, grid):
    return float(grid.h * np.sum(np.asarray(state) ** 2))


def make_wave_hierarchy(setup, nodes, levels=2):
    """Two-level (or single-level) hierarchy on [0, 1] with periodic boundaries."""
    fine = WaveLevel(Grid1D(setup.fine_points), setup.fine_order)
    lv = [fine]
    if levels == 2:
        lv.append(WaveLevel(Grid1D(setup.coarse_points), setup.coarse_order))
    elif levels != 1:
        raise ValueError("wave hierarchy supports one or two levels")
    return Hierarchy(lv, make_rule(nodes))
