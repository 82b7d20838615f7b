"""Lobatto quadrature and single-level SDC on the Dahlquist equation.

Run with ``python3 notebooks/01_quadrature_and_sdc.py``.
"""

# %% Nodes and integration matrices
import numpy as np

from mlsdc_kit.benchmarks.common import DahlquistLevel
from mlsdc_kit.collocation import make_rule
from mlsdc_kit.sweeper import spread_initial, sweep

rule = make_rule(5)
print("nodes:", np.round(rule.nodes, 6))
print("last q row (Lobatto weights):", np.round(rule.q[-1], 6))
print("rows of s sum to node spacing:", np.allclose(rule.s.sum(axis=1), np.diff(rule.nodes)))

# %% Sweeps converge to the collocation solution
# The collocation solution of u' = lam u over one step is the (M, M) Pade
# approximant of exp(lam dt); each sweep gains roughly one order in dt.
lam, dt = -10.0, 0.1
level = DahlquistLevel(lam)
for nodes in (3, 5, 7):
    rule = make_rule(nodes)
    state = spread_initial([1.0], rule, 0.0, level, dt)
    errs = []
    for _ in range(12):
        state = sweep(state, None, dt, level, rule)
        errs.append(abs(state.u[-1, 0] - np.exp(lam * dt)))
    print(f"M+1={nodes}: error after 1, 4, 12 sweeps:", " ".join(f"{errs[i]:.2e}" for i in (0, 3, 11)))

# %% IMEX splitting
# Treating part of the decay explicitly converges to the same collocation
# solution; the sweep count depends on how the stiffness is split.
rule = make_rule(5)
target = spread_initial([1.0], rule, 0.0, level, dt)
for _ in range(50):
    target = sweep(target, None, dt, level, rule)
for lam_e in (0.0, -2.0, -5.0):
    lv = DahlquistLevel(lam_implicit=lam - lam_e, lam_explicit=lam_e)
    state = spread_initial([1.0], rule, 0.0, lv, dt)
    k = 0
    while abs(state.u[-1, 0] - target.u[-1, 0]) > 1e-9 and k < 100:
        state = sweep(state, None, dt, lv, rule)
        k += 1
    print(f"explicit part {lam_e:5.1f}: {k} sweeps to within 1e-9 of the collocation solution")
