"""IMEX SDC sweeps and collocation residuals.

Node data are stored as ``(M+1, N)`` arrays: row ``m`` holds the state (or
function value) at collocation node ``t_m``.  FAS corrections are kept in
cumulative form (row ``m`` corrects the integral from ``t_0`` to ``t_m``);
sweeps consume the node-to-node increments.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .collocation import integrate_q, integrate_s

__all__ = [
    "NodeState",
    "TauCorrection",
    "spread_initial",
    "evaluate_nodes",
    "sdc_sweep",
    "weighted_sweep",
    "sweep",
    "residual",
    "weighted_residual",
    "level_residual",
    "implicit_values",
]


@dataclass
class NodeState:
    u: np.ndarray
    fe: np.ndarray
    fi: np.ndarray | None
    times: np.ndarray
    fi_tilde: np.ndarray | None = None

    @property
    def num_nodes(self):
        return self.u.shape[0]

    def copy(self):
        cp = lambda a: None if a is None else a.copy()  # noqa: E731
        return replace(self, u=self.u.copy(), fe=self.fe.copy(), fi=cp(self.fi),
                       times=self.times.copy(), fi_tilde=cp(self.fi_tilde))


@dataclass
class TauCorrection:
    """FAS correction in cumulative form; ``tau_w`` is ``W tau`` for weighted levels."""

    tau: np.ndarray
    tau_w: np.ndarray | None = None

    @classmethod
    def zeros(cls, num_nodes, size):
        z = np.zeros((num_nodes, size))
        return cls(tau=z, tau_w=z.copy())

    def weighted(self, level):
        if not level.has_weight:
            return self.tau
        if self.tau_w is None:
            self.tau_w = np.array([level.apply_weight(t) for t in self.tau])
        return self.tau_w


def evaluate_nodes(level, u, times):
    fe = np.array([level.eval_explicit(um, t) for um, t in zip(u, times)])
    if level.has_weight:
        fit = np.array([level.eval_implicit_tilde(um, t) for um, t in zip(u, times)])
        return fe, None, fit
    fi = np.array([level.eval_implicit(um, t) for um, t in zip(u, times)])
    return fe, fi, None


def spread_initial(u0, rule, t0, level, dt=1.0):
    """Copy ``u0`` to every node and evaluate the right-hand side there."""
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    if not np.all(np.isfinite(u0)):
        raise ValueError("initial value contains non-finite entries")
    times = t0 + dt * rule.nodes
    u = np.tile(u0, (rule.m_plus_1, 1))
    fe, fi, fit = evaluate_nodes(level, u, times)
    return NodeState(u=u, fe=fe, fi=fi, times=times, fi_tilde=fit)


def implicit_values(level, state, tol=1e-14):
    """Materialize f_I at every node (needs W solves on weighted levels)."""
    if state.fi is not None:
        return state.fi
    return np.array([level.solve_weight(v, tol) for v in state.fi_tilde])


def _tau_increments(tau, shape):
    if tau is None:
        return np.zeros((shape[0] - 1, shape[1]))
    t = tau.tau if isinstance(tau, TauCorrection) else np.asarray(tau)
    return t[1:] - t[:-1]


def sdc_sweep(state, tau, dt, level, rule, policy=None):
    """One forward/backward-Euler IMEX sweep over all substeps."""
    policy = policy or level.policy
    old = state
    new = state.copy()
    integrals = integrate_s(rule, old.fe + old.fi, dt)
    dtau = _tau_increments(tau, old.u.shape)
    for m in range(rule.num_substeps):
        dtm = dt * (rule.nodes[m + 1] - rule.nodes[m])
        t_next = old.times[m + 1]
        rhs = (new.u[m] + dtm * (new.fe[m] - old.fe[m] - old.fi[m + 1])
               + integrals[m] + dtau[m])
        u_next = level.implicit_solve(rhs, dtm, t_next, guess=old.u[m + 1], policy=policy)
        new.u[m + 1] = u_next
        new.fe[m + 1] = level.eval_explicit(u_next, t_next)
        new.fi[m + 1] = level.eval_implicit(u_next, t_next)
    return new


def weighted_sweep(state, tau_w, dt, level, rule, policy=None):
    """Sweep for ``f_I = W^{-1} A``, solving ``(W - dt_m A) U = rhs`` per substep.

    ``tau_w`` is the FAS correction already multiplied by ``W``.  Only
    ``fe`` and ``fi_tilde = A u`` are updated; ``fi`` is left unset.
    """
    if not level.has_weight:
        raise TypeError("weighted_sweep needs a level with a weighting matrix")
    if state.fi_tilde is None:
        raise ValueError("state carries no fi_tilde values")
    policy = policy or level.policy
    old = state
    new = state.copy()
    new.fi = None
    w_fe = np.array([level.apply_weight(v) for v in old.fe])
    integrals = integrate_s(rule, w_fe + old.fi_tilde, dt)
    if isinstance(tau_w, TauCorrection):
        tau_w = tau_w.weighted(level)
    dtau = _tau_increments(tau_w, old.u.shape)
    for m in range(rule.num_substeps):
        dtm = dt * (rule.nodes[m + 1] - rule.nodes[m])
        t_next = old.times[m + 1]
        rhs = (level.apply_weight(new.u[m] + dtm * (new.fe[m] - old.fe[m]))
               - dtm * old.fi_tilde[m + 1] + integrals[m] + dtau[m])
        u_next = level.implicit_solve(rhs, dtm, t_next, guess=old.u[m + 1], policy=policy)
        new.u[m + 1] = u_next
        new.fe[m + 1] = level.eval_explicit(u_next, t_next)
        new.fi_tilde[m + 1] = level.eval_implicit_tilde(u_next, t_next)
    return new


def sweep(state, tau, dt, level, rule, policy=None):
    """Dispatch to the weighted or unweighted sweep."""
    if level.has_weight:
        tw = tau.weighted(level) if isinstance(tau, TauCorrection) else tau
        return weighted_sweep(state, tw, dt, level, rule, policy)
    return sdc_sweep(state, tau, dt, level, rule, policy)


def _norm(r):
    return float(np.max(np.abs(r[1:]))) if r.shape[0] > 1 and r.size else 0.0


def residual(state, tau, u0, dt, rule):
    """Per-node residual ``u0 + dt (Q F)_m + tau_m - u_m`` and its max norm over m >= 1."""
    r = u0[None, :] + integrate_q(rule, state.fe + state.fi, dt) - state.u
    if tau is not None:
        r = r + (tau.tau if isinstance(tau, TauCorrection) else tau)
    return r, _norm(r)


def weighted_residual(state, tau, u0, dt, rule, level, tol=1e-14):
    """Residual of a weighted level, recovered from ``W r`` by W solves."""
    if not level.has_weight:
        raise TypeError("weighted_residual needs a level with a weighting matrix")
    w_fe = np.array([level.apply_weight(v) for v in state.fe])
    wr = (level.apply_weight(u0)[None, :] + integrate_q(rule, w_fe + state.fi_tilde, dt)
          - np.array([level.apply_weight(v) for v in state.u]))
    if tau is not None:
        wr = wr + (tau.weighted(level) if isinstance(tau, TauCorrection) else tau)
    r = np.zeros_like(wr)
    for m in range(1, wr.shape[0]):
        r[m] = level.solve_weight(wr[m], tol)
    return r, _norm(r)


def level_residual(state, tau, u0, dt, rule, level):
    if level.has_weight:
        return weighted_residual(state, tau, u0, dt, rule, level)
    return residual(state, tau, u0, dt, rule)
