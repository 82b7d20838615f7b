"""Acceptance checks, one test per criterion.

Each test prints a ``[PASS]`` or ``[FAIL]`` line with the measured numbers
and then asserts the criterion at its stated tolerance.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.interpolate import pade
from scipy.sparse.linalg import spsolve

from mlsdc_kit.benchmarks.burgers import BurgersSetup
from mlsdc_kit.benchmarks.common import HeatLevel
from mlsdc_kit.benchmarks.errors import burgers_error_study
from mlsdc_kit.benchmarks.tables import PUBLISHED, run_cell, table_cells
from mlsdc_kit.collocation import make_rule
from mlsdc_kit.controller import fas_tau
from mlsdc_kit.multigrid import build_multigrid
from mlsdc_kit.problem import SolvePolicy
from mlsdc_kit.spatial import Grid1D, Grid2D, compact4_pair, laplacian_matrix
from mlsdc_kit.sweeper import NodeState, evaluate_nodes, level_residual, residual, spread_initial, sweep
from oracles import DenseLinearLevel, collocation_solution, dense_fas, injection_matrix

ROOT = Path(__file__).resolve().parents[1]
TIGHT = SolvePolicy(mode="full", tol=1e-15)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail
    return emit


def state_from(level, rule, u, dt):
    fe, fi, fit = evaluate_nodes(level, u, dt * rule.nodes)
    return NodeState(u=np.array(u, dtype=float), fe=fe, fi=fi, times=dt * rule.nodes, fi_tilde=fit)


def heat_matrix(n, order, nu):
    g = Grid1D(n)
    if order == 4:
        pair = compact4_pair(g)
        return nu * spsolve(pair.W.tocsc(), pair.A.toarray())
    return nu * laplacian_matrix(g, 2).toarray()


def test_criterion_01_quadrature(report):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (2, 3, 5, 7, 9, 13):
        rule = make_rule(n)
        m = n - 1
        t, q, s = rule.nodes, rule.q, rule.s
        errs = [np.abs(t + t[::-1] - 1).max(), np.abs(q[0]).max(), np.abs(s - (q[1:] - q[:-1])).max()]
        errs += [np.abs(q @ t**p - t ** (p + 1) / (p + 1)).max() for p in range(m + 1)]
        errs += [abs(q[-1] @ t**p - 1 / (p + 1)) for p in range(2 * m)]
        worst = max(worst, max(errs))
    elapsed = time.perf_counter() - t0
    report(1, worst <= 1e-12 and elapsed < 1.0,
           f"max quadrature identity error {worst:.2e} (tol 1e-12), {elapsed:.3f} s")


def test_criterion_02_sdc_equals_collocation(report):
    t0 = time.perf_counter()
    from mlsdc_kit.benchmarks.common import DahlquistLevel

    worst_coll = worst_pade = 0.0
    order_ok = True
    for lam in (-1.0, -10.0):
        for n in (3, 5, 7):
            rule, dt, m = make_rule(n), 0.1, n - 1
            level = DahlquistLevel(lam)
            state = spread_initial([1.0], rule, 0.0, level, dt)
            for _ in range(50):
                state = sweep(state, None, dt, level, rule)
            dense = collocation_solution(rule, dt, [[lam]], np.array([1.0]))
            worst_coll = max(worst_coll, np.abs(state.u - dense).max())
            z = lam * dt
            p, qq = pade([1 / math.factorial(k) for k in range(2 * m + 1)], m, m)
            worst_pade = max(worst_pade, abs(state.u[-1, 0] - p(z) / qq(z)))
            c = math.factorial(m) ** 2 / (math.factorial(2 * m) * math.factorial(2 * m + 1))
            order_ok &= abs(state.u[-1, 0] - math.exp(z)) <= 2 * c * abs(z) ** (2 * m + 1) + 1e-15
    elapsed = time.perf_counter() - t0
    ok = worst_coll <= 1e-12 and worst_pade <= 1e-12 and order_ok and elapsed < 1.0
    report(2, ok, f"sweeps vs dense collocation {worst_coll:.2e}, end value vs (M,M) Pade {worst_pade:.2e}, "
                  f"order-2M error bound {'met' if order_ok else 'violated'}, {elapsed:.3f} s")


def test_criterion_03_fixed_point_and_fas(report):
    t0 = time.perf_counter()
    rule, dt, nu = make_rule(5), 0.05, 0.5
    # sweep fixed point
    fixed = 0.0
    for order in (2, 4):
        level = HeatLevel(Grid1D(16), nu, order, TIGHT)
        u0 = np.sin(2 * np.pi * level.grid.x)
        u = collocation_solution(rule, dt, heat_matrix(16, order, nu), u0)
        fixed = max(fixed, np.abs(sweep(state_from(level, rule, u, dt), None, dt, level, rule).u - u).max())
    # tau against the dense formula on N = 8 / 4
    fas = 0.0
    rng = np.random.default_rng(0)
    for fo, co in ((2, 2), (4, 2), (4, 4)):
        fine, coarse = HeatLevel(Grid1D(8), nu, fo, TIGHT), HeatLevel(Grid1D(4), nu, co, TIGHT)
        u = rng.standard_normal((5, 8))
        tc, _ = fas_tau(state_from(fine, rule, u, dt), fine, coarse, None, dt, rule)
        ref = dense_fas(rule, dt, heat_matrix(8, fo, nu), heat_matrix(4, co, nu), injection_matrix(8, 4), u)
        ref[0] = 0.0
        fas = max(fas, np.abs(tc.tau - ref).max())
    # zero fine residual gives a solution of the corrected coarse problem
    fine, coarse = HeatLevel(Grid1D(32), nu, 4, TIGHT), HeatLevel(Grid1D(16), nu, 2, TIGHT)
    u0 = np.sin(2 * np.pi * fine.grid.x)
    u = collocation_solution(rule, dt, heat_matrix(32, 4, nu), u0)
    tc, cstate = fas_tau(state_from(fine, rule, u, dt), fine, coarse, None, dt, rule)
    _, cres = level_residual(cstate, tc, u0[::2], dt, rule, coarse)
    elapsed = time.perf_counter() - t0
    ok = fixed <= 1e-11 and fas <= 1e-12 and cres <= 1e-11 and elapsed < 5.0
    report(3, ok, f"fixed point {fixed:.2e} (tol 1e-11), tau vs dense {fas:.2e} (tol 1e-12), "
                  f"corrected coarse residual {cres:.2e} (tol 1e-11), {elapsed:.2f} s")


def test_criterion_04_table2(report):
    t0 = time.perf_counter()
    got = {}
    for cell in table_cells(2):
        row, _ = run_cell(cell)
        got[cell[1]] = row["avg_fine_sweeps"]
    elapsed = time.perf_counter() - t0
    parts, ok = [], elapsed < 60
    for key, target in PUBLISHED[2].items():
        hit = abs(got[key] - target) <= 1
        ok &= hit
        parts.append(f"{key[0]} nu={key[1]}: {got[key]:g} (target {target}{'' if hit else ', off'})")
    report(4, ok, "; ".join(parts) + f"; {elapsed:.1f} s")


def test_criterion_05_error_components(report, burgers_references):
    t0 = time.perf_counter()
    parts, ok = [], True
    for nu, anchor in ((0.1, "eps_n"), (1.0, "eps_dt")):
        rep, _ = burgers_error_study(BurgersSetup(nu=nu), 80, refs=burgers_references[nu])
        coll = [rep.eps_coll[l][-1] for l in range(2)]
        fine_pde = rep.eps_pde[0][-1]
        target = getattr(rep, anchor)[0]
        ratio = fine_pde / target
        r_pde = rep.eps_pde[1][-1] / rep.eps_pde[0][-1]
        r_ode = rep.eps_ode[1][-1] / rep.eps_ode[0][-1]
        this = (max(coll) <= 1e-11 and 1 / 3 <= ratio <= 3 and 0.5 <= r_pde <= 2 and 0.5 <= r_ode <= 2)
        ok &= this
        parts.append(f"nu={nu}: eps_coll {coll[0]:.1e}/{coll[1]:.1e}, fine eps_PDE {fine_pde:.2e} vs "
                     f"{anchor} {target:.2e} (x{ratio:.2f}), coarse/fine eps_PDE x{r_pde:.2f}, "
                     f"eps_ODE x{r_ode:.2f}")
    elapsed = time.perf_counter() - t0
    report(5, ok and elapsed < 120, "; ".join(parts) + f"; {elapsed:.1f} s (references shared)")


def test_criterion_06_table1(report):
    t0 = time.perf_counter()
    got = {cell[1]: run_cell(cell)[0]["avg_fine_sweeps"] for cell in table_cells(1)}
    elapsed = time.perf_counter() - t0
    parts, band_ok, ratio_ok = [], True, True
    for n in (3, 5, 7):
        s, m = got[("sdc", n)], got[("mlsdc", n)]
        ps, pm = PUBLISHED[1][("sdc", n)], PUBLISHED[1][("mlsdc", n)]
        band = abs(s / ps - 1) <= 0.2 and abs(m / pm - 1) <= 0.2
        band_ok &= band
        ratio_ok &= m / s <= 0.7
        parts.append(f"M+1={n}: SDC {s:.2f} (target {ps}), MLSDC {m:.2f} (target {pm}), ratio {m / s:.2f}")
    report(6, band_ok and ratio_ok and elapsed < 120,
           "; ".join(parts) + f"; band {'met' if band_ok else 'missed'}, ratio {'met' if ratio_ok else 'missed'}"
           f"; {elapsed:.1f} s")


@pytest.mark.slow
def test_criterion_07_table3_pattern(report):
    options = json.loads((ROOT / "results" / "table3_64.json").read_text())
    t0 = time.perf_counter()
    got = {}
    for cell in table_cells(3, options):
        row, info = run_cell(cell)
        assert not info["unconverged_steps"], f"variant {cell[1]} left steps unconverged"
        got[cell[1]] = row["avg_fine_sweeps"]
    elapsed = time.perf_counter() - t0
    sdc = got.pop(None)
    strict = got["2,3(1)"] < sdc
    family = all(abs(got[v] - sdc) <= 2 for v in ("1,2", "1,2,3(1)", "1,2,3(2)"))
    detail = ", ".join(f"{k}: {v:.3f}" for k, v in got.items())
    report(7, strict and family,
           f"{options['shear']['n_points']}^2 grid: SDC {sdc:.3f}; {detail}; {elapsed / 60:.1f} min")


def test_criterion_08_multigrid(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)

    def rate(mg, b):
        x, res = np.zeros_like(b), [mg.residual_norm(b, np.zeros_like(b))]
        for _ in range(6):
            x = mg.vcycle(b, x)
            res.append(mg.residual_norm(b, x))
        return max(res[k + 1] / res[k] for k in range(1, 6))

    g1 = Grid1D(127, bc="dirichlet0")
    r1 = rate(build_multigrid(g1, lambda g: sp.csr_matrix(-laplacian_matrix(g))), rng.standard_normal(127))
    g2 = Grid2D(64, 64)
    b2 = rng.standard_normal(g2.size)
    b2 -= b2.mean()
    r2 = rate(build_multigrid(g2, lambda g: sp.csr_matrix(-laplacian_matrix(g)), singular=True), b2)
    worst = 0.0
    g = Grid1D(256)
    pair = compact4_pair(g)
    for a in (1e-3, 1e-2, 1e-1):
        mg = build_multigrid(g, lambda gg: sp.csr_matrix(compact4_pair(gg).W - a * compact4_pair(gg).A))
        b = rng.standard_normal(256)
        x, _, _ = mg.solve(b, tol=1e-14)
        worst = max(worst, np.abs(x - np.linalg.solve((pair.W - a * pair.A).toarray(), b)).max())
    gd = Grid1D(255, bc="dirichlet0")
    shifted = lambda gg: sp.csr_matrix(sp.identity(gg.n) - 0.01 * laplacian_matrix(gg))  # noqa: E731
    b = rng.standard_normal(255)
    x, _, _ = build_multigrid(gd, shifted).solve(b, tol=1e-14)
    worst = max(worst, np.abs(x - np.linalg.solve(shifted(gd).toarray(), b)).max())
    elapsed = time.perf_counter() - t0
    ok = r1 <= 0.2 and r2 <= 0.2 and worst <= 1e-10 and elapsed < 30
    report(8, ok, f"V-cycle contraction 1D {r1:.3f}, 2D {r2:.3f} (bound 0.2); solve vs dense {worst:.2e} "
                  f"(tol 1e-10); {elapsed:.2f} s")


def test_criterion_09_weighted_equivalence(report):
    t0 = time.perf_counter()
    rule, dt, g = make_rule(5), 0.02, Grid1D(32)
    weighted = HeatLevel(g, 1.0, 4, TIGHT)
    plain = DenseLinearLevel(np.zeros((32, 32)), heat_matrix(32, 4, 1.0), grid=g)
    rng = np.random.default_rng(1)
    u0 = np.sin(2 * np.pi * g.x)
    u = u0 + 0.05 * rng.standard_normal((5, 32))
    u[0] = u0
    sw = sweep(state_from(weighted, rule, u, dt), None, dt, weighted, rule)
    sp_ = sweep(state_from(plain, rule, u, dt), None, dt, plain, rule)
    d_sweep = np.abs(sw.u - sp_.u).max()
    rw, _ = level_residual(sw, None, u0, dt, rule, weighted)
    rp, _ = residual(sp_, None, u0, dt, rule)
    d_res = np.abs(rw - rp).max()
    elapsed = time.perf_counter() - t0
    report(9, d_sweep <= 1e-11 and d_res <= 1e-11 and elapsed < 1.0,
           f"sweep difference {d_sweep:.2e}, residual difference {d_res:.2e} (tol 1e-11), {elapsed:.3f} s")


def test_criterion_10_out_of_scope_declared(report):
    readme = (ROOT / "README.md").read_text()
    declared = "## Out of scope" in readme and "3D" in readme
    # the inexact-solve coarsening is exercised: a fixed-V-cycle level does exactly n cycles
    level = HeatLevel(Grid1D(64), 1.0, 4, SolvePolicy.vcycles(2))
    b = np.random.default_rng(2).standard_normal(64)
    mg = level.solver_for(0.01)
    expect = mg.vcycle(b, mg.vcycle(b, b.copy()))
    same = np.array_equal(level.implicit_solve(b, 0.01), expect)
    report(10, declared and same,
           f"README declares the out-of-scope items: {declared}; fixed two-V-cycle solve reproduced: {same}")
