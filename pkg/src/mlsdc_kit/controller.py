"""Single-level SDC and multi-level SDC (MLSDC) drivers.

An MLSDC iteration is one fine sweep followed, unless the fine residual is
already below tolerance, by a V-cycle through the coarser levels with FAS
corrections.  The final coarse-to-fine interpolation does not sweep: the
next iteration's opening fine sweep plays that role, which is why a
converged MLSDC step costs ``iterations + 1`` fine sweeps.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .collocation import integrate_q
from .problem import interpolate, restrict
from .sweeper import (
    NodeState,
    TauCorrection,
    evaluate_nodes,
    implicit_values,
    level_residual,
    spread_initial,
    sweep,
)

__all__ = [
    "MLSDCConfig",
    "IterationStats",
    "SimulationStats",
    "DivergenceError",
    "StepFailure",
    "fas_tau",
    "mlsdc_iteration",
    "sdc_iteration",
    "run_step",
    "run_simulation",
]

log = logging.getLogger(__name__)

TRANSFER_MODES = ("interpolate_increments", "re_evaluate")


class DivergenceError(RuntimeError):
    def __init__(self, residual):
        super().__init__(f"iteration diverged (residual {residual:.3e})")
        self.residual = residual


class StepFailure(RuntimeError):
    def __init__(self, step, cause):
        super().__init__(f"time step {step} failed: {cause}")
        self.step = step
        self.cause = cause


@dataclass
class MLSDCConfig:
    tol: float = 1e-10
    k_max: int = 50
    sweeps_per_level: list | None = None
    f_transfer_mode: str = "interpolate_increments"
    interp_degree: int = 3
    divergence_bound: float = 1e10

    def __post_init__(self):
        if not self.tol >= 0:
            raise ValueError("tol must be non-negative")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.f_transfer_mode not in TRANSFER_MODES:
            raise ValueError(f"unknown f_transfer_mode {self.f_transfer_mode!r}")
        if self.interp_degree < 1 or self.interp_degree % 2 == 0:
            raise ValueError("interp_degree must be an odd positive integer")


@dataclass
class IterationStats:
    fine_sweeps: int = 0
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    per_level_sweeps: list = field(default_factory=list)
    converged: bool = False

    def as_dict(self):
        return {
            "fine_sweeps": self.fine_sweeps,
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "per_level_sweeps": list(self.per_level_sweeps),
            "converged": self.converged,
        }


@dataclass
class SimulationStats:
    steps: list = field(default_factory=list)

    @property
    def average_fine_sweeps(self):
        return float(np.mean([s.fine_sweeps for s in self.steps])) if self.steps else 0.0

    @property
    def unconverged_steps(self):
        return [i for i, s in enumerate(self.steps) if not s.converged]

    def as_dict(self):
        return {
            "average_fine_sweeps": self.average_fine_sweeps,
            "unconverged_steps": self.unconverged_steps,
            "steps": [s.as_dict() for s in self.steps],
        }


def _full_f(level, state):
    return state.fe + implicit_values(level, state)


def fas_tau(fine_state, fine_level, coarse_level, parent_tau, dt, rule):
    """FAS correction for ``coarse_level`` and the restricted starting state.

    ``tau = dt (R Q F_fine(U) - Q F_coarse(R U)) + R parent_tau``.  Returns
    ``(TauCorrection, coarse NodeState)``; the coarse state holds ``R U``
    with freshly evaluated right-hand sides.
    """
    u_c = np.array([restrict(v, fine_level, coarse_level) for v in fine_state.u])
    fe_c, fi_c, fit_c = evaluate_nodes(coarse_level, u_c, fine_state.times)
    coarse = NodeState(u=u_c, fe=fe_c, fi=fi_c, times=fine_state.times.copy(), fi_tilde=fit_c)
    qf_fine = integrate_q(rule, _full_f(fine_level, fine_state), dt)
    qf_coarse = integrate_q(rule, _full_f(coarse_level, coarse), dt)
    tau = np.array([restrict(v, fine_level, coarse_level) for v in qf_fine]) - qf_coarse
    if parent_tau is not None:
        ptau = parent_tau.tau if isinstance(parent_tau, TauCorrection) else parent_tau
        tau += np.array([restrict(v, fine_level, coarse_level) for v in ptau])
    tau[0] = 0.0
    tau_w = None
    if coarse_level.has_weight:
        tau_w = np.array([coarse_level.apply_weight(v) for v in tau])
    return TauCorrection(tau=tau, tau_w=tau_w), coarse


def _interpolate_correction(fine_level, coarse_level, fine, coarse, saved, cfg):
    """Add the interpolated coarse correction to ``fine`` (in place)."""
    deg = cfg.interp_degree
    interp = lambda v: interpolate(v, coarse_level, fine_level, deg)  # noqa: E731
    du = coarse.u - saved.u
    fine.u += np.array([interp(v) for v in du])
    if cfg.f_transfer_mode == "re_evaluate":
        fine.fe, fine.fi, fine.fi_tilde = evaluate_nodes(fine_level, fine.u, fine.times)
        return
    dfe = coarse.fe - saved.fe
    fine.fe += np.array([interp(v) for v in dfe])
    if coarse_level.has_weight:
        dfi = np.array([coarse_level.solve_weight(v) for v in coarse.fi_tilde - saved.fi_tilde])
    else:
        dfi = coarse.fi - saved.fi
    dfi_f = np.array([interp(v) for v in dfi])
    if fine_level.has_weight:
        fine.fi_tilde += np.array([fine_level.apply_weight(v) for v in dfi_f])
        fine.fi = None
    else:
        fine.fi += dfi_f


def _check(res, cfg):
    if not np.isfinite(res) or res > cfg.divergence_bound:
        raise DivergenceError(res)


def sdc_iteration(hier, states, u0, dt, cfg, stats):
    """One fine sweep plus residual check (single-level SDC)."""
    level, rule = hier.levels[0], hier.rule
    states[0] = sweep(states[0], None, dt, level, rule)
    stats.fine_sweeps += 1
    stats.per_level_sweeps[0] += 1
    _, res = level_residual(states[0], None, u0, dt, rule, level)
    stats.residual_history.append(res)
    _check(res, cfg)
    return states, res <= cfg.tol, res


def mlsdc_iteration(hier, states, taus, u0, dt, cfg, stats):
    """One MLSDC V-cycle; returns ``(states, converged, fine_residual)``."""
    levels, rule = hier.levels, hier.rule
    n_sweeps = cfg.sweeps_per_level or hier.sweeps_per_level
    states, converged, res = sdc_iteration(hier, states, u0, dt, cfg, stats)
    if converged:
        return states, True, res
    if len(levels) == 1:
        stats.iterations += 1
        return states, False, res

    saved = [None] * len(levels)
    for l in range(len(levels) - 1):
        taus[l + 1], states[l + 1] = fas_tau(states[l], levels[l], levels[l + 1], taus[l], dt, rule)
        saved[l + 1] = states[l + 1].copy()
        for _ in range(n_sweeps[l + 1]):
            states[l + 1] = sweep(states[l + 1], taus[l + 1], dt, levels[l + 1], rule)
            stats.per_level_sweeps[l + 1] += 1

    for l in range(len(levels) - 2, 0, -1):
        _interpolate_correction(levels[l], levels[l + 1], states[l], states[l + 1], saved[l + 1], cfg)
        for _ in range(n_sweeps[l]):
            states[l] = sweep(states[l], taus[l], dt, levels[l], rule)
            stats.per_level_sweeps[l] += 1

    _interpolate_correction(levels[0], levels[1], states[0], states[1], saved[1], cfg)
    stats.iterations += 1
    return states, False, res


def run_step(hier, u0, t0, dt, cfg, method="mlsdc", callback=None):
    """Advance one time step; returns ``(u_end, IterationStats, states)``.

    ``callback(k, states)`` is invoked after every iteration.  With
    ``cfg.tol == 0`` exactly ``cfg.k_max`` iterations are performed.
    """
    method = method.lower()
    if method not in ("sdc", "mlsdc"):
        raise ValueError(f"unknown method {method!r}")
    levels = hier.levels
    u0 = np.asarray(u0, dtype=float).reshape(-1)
    if u0.size != levels[0].size:
        raise ValueError(f"initial value has {u0.size} entries, level expects {levels[0].size}")
    states = [spread_initial(u0, hier.rule, t0, levels[0], dt)] + [None] * (len(levels) - 1)
    taus = [None] * len(levels)
    n_levels = len(levels) if method == "mlsdc" else 1
    stats = IterationStats(per_level_sweeps=[0] * n_levels)
    for k in range(1, cfg.k_max + 1):
        if method == "sdc":
            states, converged, res = sdc_iteration(hier, states, u0, dt, cfg, stats)
            stats.iterations += 1
        else:
            states, converged, res = mlsdc_iteration(hier, states, taus, u0, dt, cfg, stats)
        if callback is not None:
            callback(k, states)
        if converged:
            stats.converged = True
            break
    if not stats.converged and cfg.tol > 0:
        log.warning("no convergence after %d iterations (residual %.3e)", cfg.k_max, res)
    return states[0].u[-1].copy(), stats, states


def run_simulation(hier, u0, t0, n_steps, dt, cfg, method="mlsdc", step_callback=None):
    """March ``n_steps`` steps serially; returns ``(u_final, SimulationStats)``."""
    u = np.asarray(u0, dtype=float).reshape(-1).copy()
    sim = SimulationStats()
    for n in range(n_steps):
        t = t0 + n * dt
        try:
            u, stats, _ = run_step(hier, u, t, dt, cfg, method)
        except Exception as exc:
            raise StepFailure(n, exc) from exc
        sim.steps.append(stats)
        log.debug("step %d: %d fine sweeps, residual %.3e", n, stats.fine_sweeps,
                  stats.residual_history[-1])
        if step_callback is not None:
            step_callback(n, u, stats)
    return u, sim
