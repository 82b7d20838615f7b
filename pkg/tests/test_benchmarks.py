import numpy as np
import pytest

from mlsdc_kit.benchmarks.burgers import (
    BurgersLevel,
    BurgersSetup,
    LevelSpec,
    burgers_initial,
    make_burgers_hierarchy,
    reference_solutions,
)
from mlsdc_kit.benchmarks.errors import burgers_error_study, error_components
from mlsdc_kit.benchmarks.shear import (
    SHEAR_VARIANTS,
    ShearLevel,
    ShearSetup,
    make_shear_hierarchy,
    shear_initial_vorticity,
)
from mlsdc_kit.benchmarks.tables import PUBLISHED, TABLE_COLUMNS, rel_dev, run_cell, table_cells
from mlsdc_kit.benchmarks.wave import WaveSetup, make_wave_hierarchy, wave_energy, wave_initial
from mlsdc_kit.collocation import make_rule
from mlsdc_kit.controller import MLSDCConfig, run_simulation
from mlsdc_kit.problem import Hierarchy, SolvePolicy
from mlsdc_kit.spatial import Grid1D, Grid2D

SMALL_BURGERS = BurgersSetup(
    levels=(LevelSpec(64, 4, "weno5", SolvePolicy(tol=5e-14)), LevelSpec(32, 2, "upwind1", SolvePolicy.vcycles(1))),
    ref_n_points=128, ref_dt=1e-3,
)


# ---------------------------------------------------------------------------
# wave

def test_wave_zero_data_stays_zero():
    hier = make_wave_hierarchy(WaveSetup(fine_points=32, coarse_points=16), 5)
    u, sim = run_simulation(hier, np.zeros(64), 0.0, 3, 0.025, MLSDCConfig(tol=1e-12))
    assert not u.any()
    assert all(s.fine_sweeps == 1 for s in sim.steps)


@pytest.mark.parametrize("method", ["sdc", "mlsdc"])
def test_wave_energy_and_periodic_return(method):
    setup = WaveSetup()
    hier = make_wave_hierarchy(setup, 5, 2 if method == "mlsdc" else 1)
    g = hier.levels[0].grid
    u0 = wave_initial(g, setup.width)
    u, sim = run_simulation(hier, u0, 0.0, setup.n_steps, setup.dt, MLSDCConfig(tol=setup.tol), method)
    assert not sim.unconverged_steps
    assert abs(wave_energy(u, g) / wave_energy(u0, g) - 1) < 1e-6
    # unit speed on a unit periodic domain: the pulse is back after t = 1
    assert np.abs(u - u0).max() < 1e-3


def test_wave_hierarchy_rejects_three_levels():
    with pytest.raises(ValueError):
        make_wave_hierarchy(WaveSetup(), 3, levels=3)


# ---------------------------------------------------------------------------
# Burgers

def test_burgers_conserves_mass():
    setup = BurgersSetup()
    hier = make_burgers_hierarchy(setup)
    g = hier.levels[0].grid
    u0 = burgers_initial(g, setup.sigma)
    u, _ = run_simulation(hier, u0, 0.0, 5, setup.dt, MLSDCConfig(tol=1e-10))
    assert abs(g.h * (u.sum() - u0.sum())) < 1e-13


def test_inviscid_burgers_stays_bounded_and_conservative():
    level = BurgersLevel(Grid1D(128, domain=(-1.0, 1.0)), 0.0, 2, "weno5")
    u0 = burgers_initial(level.grid)
    u, sim = run_simulation(Hierarchy([level], make_rule(5)), u0, 0.0, 20, 0.005, MLSDCConfig(tol=1e-10), "sdc")
    assert not sim.unconverged_steps
    assert -1e-3 < u.min() and u.max() <= 1.0 + 1e-3
    assert abs(u.sum() - u0.sum()) < 1e-12


def test_burgers_level_validation():
    with pytest.raises(ValueError):
        BurgersLevel(Grid1D(8), 0.1, 4, "weno5")
    with pytest.raises(ValueError):
        BurgersLevel(Grid1D(32), 0.1, 4, "centered")


def test_reference_on_the_reference_grid_reuses_the_pde_run():
    setup = BurgersSetup(levels=(LevelSpec(128, 4, "weno5"), LevelSpec(64, 2, "upwind1")),
                         ref_n_points=128, ref_dt=1e-3, coll_sweeps=30)
    refs = reference_solutions(setup)
    np.testing.assert_array_equal(refs[0]["pde"], refs[0]["ode"])
    np.testing.assert_array_equal(refs[1]["pde"], refs[0]["pde"][::2])
    assert np.abs(refs[1]["pde"] - refs[1]["ode"]).max() > 1e-6


def test_reference_solutions_structure_and_consistency(burgers_references):
    for nu, refs in burgers_references.items():
        assert [r["grid"].n for r in refs] == [256, 128]
        for r in refs:
            assert r["coll_residual"] <= 1e-12
            assert r["pde"].shape == r["ode"].shape == r["coll"].shape == (r["grid"].n,)
    eps_dt = {nu: np.abs(refs[0]["ode"] - refs[0]["coll"]).max() for nu, refs in burgers_references.items()}
    assert eps_dt[1.0] > 100 * eps_dt[0.1]


def test_error_components_of_exact_iterates_vanish():
    g = Grid1D(16)
    levels = [BurgersLevel(g, 0.1, 4, "weno5"), BurgersLevel(g.coarsen(), 0.1, 2, "upwind1")]
    rng = np.random.default_rng(0)
    fine = {k: rng.standard_normal(16) for k in ("pde", "ode", "coll")}
    coarse = {k: v[::2] for k, v in fine.items()}
    iterates = [[fine["coll"], coarse["coll"]]] * 3
    rep = error_components(iterates, [fine, coarse], fine, levels)
    assert rep.n_levels == 2 and rep.n_iterations == 3
    assert rep.eps_coll == [[0.0] * 3, [0.0] * 3]
    scale = np.abs(fine["pde"]).max()
    assert rep.eps_n[0] == pytest.approx(np.abs(fine["pde"] - fine["ode"]).max() / scale)
    assert len(rep.rows()) == 6 and rep.rows()[1][:2] == (1, 2)


def test_error_study_reaches_collocation_on_small_setup():
    rep, refs = burgers_error_study(SMALL_BURGERS, k_iterations=25)
    assert rep.n_iterations == 25
    assert rep.eps_coll[0][-1] < 1e-11
    assert rep.eps_coll[0][-1] < rep.eps_coll[0][0]
    assert rep.eps_pde[0][-1] == pytest.approx(
        np.abs(refs[0]["pde"] - refs[0]["coll"]).max() / np.abs(refs[0]["pde"]).max(), rel=1e-6)


# ---------------------------------------------------------------------------
# shear layer

def test_shear_zero_vorticity_is_stationary():
    level = ShearLevel(Grid2D(16, 16), 1e-3, 4)
    assert not level.eval_explicit(np.zeros(256)).any()
    assert not level.eval_implicit(np.zeros(256)).any()


def test_shear_preserves_mean_vorticity():
    setup = ShearSetup(n_points=32, nodes=5, dt=1 / 64, n_steps=3, tol=1e-10)
    hier = make_shear_hierarchy(setup, "1,2,3(1)")
    w0 = shear_initial_vorticity(hier.levels[0].grid, setup.rho, setup.delta)
    w, sim = run_simulation(hier, w0, 0.0, setup.n_steps, setup.dt, MLSDCConfig(tol=setup.tol))
    assert not sim.unconverged_steps
    assert abs(w.mean()) < 1e-13 and abs(w0.mean()) < 1e-13


def test_shear_variants_build():
    setup = ShearSetup(n_points=16)
    for name, (div, order, _) in SHEAR_VARIANTS.items():
        hier = make_shear_hierarchy(setup, name)
        assert hier.levels[1].grid.nx == 16 // div and hier.levels[1].space_order == order
    assert len(make_shear_hierarchy(setup).levels) == 1
    with pytest.raises(ValueError):
        make_shear_hierarchy(setup, "3,4")


# ---------------------------------------------------------------------------
# tables

def test_table_cells_and_published_values():
    assert [c[1] for c in table_cells(1)] == [(m, n) for n in (3, 5, 7) for m in ("sdc", "mlsdc")]
    assert [c[1] for c in table_cells(3)] == [None, *SHEAR_VARIANTS]
    assert set(PUBLISHED[2]) == {c[1] for c in table_cells(2)}
    assert rel_dev(12.0, 10.0) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        table_cells(4)


def test_run_cell_on_reduced_wave_problem():
    options = {"wave": {"fine_points": 32, "coarse_points": 16, "n_steps": 2}}
    row, info = run_cell((1, ("mlsdc", 3), options))
    assert tuple(row) == TABLE_COLUMNS
    assert row["paper_value"] == PUBLISHED[1][("mlsdc", 3)]
    assert len(info["fine_sweeps"]) == 2 and info["unconverged_steps"] == []
    assert row["avg_fine_sweeps"] == np.mean(info["fine_sweeps"])


def test_run_cell_burgers_single_step():
    row, info = run_cell((2, ("sdc", 0.1), {}))
    assert row["avg_fine_sweeps"] == info["fine_sweeps"][0] and info["unconverged_steps"] == []


def test_iteration_error_is_nonincreasing_after_transient(burgers_references):
    rep, _ = burgers_error_study(BurgersSetup(nu=0.1), 80, refs=burgers_references[0.1])
    for level in range(2):
        tail = np.array(rep.eps_coll[level][20:])
        assert np.all(np.diff(tail) <= 1e-13)
        assert all(v >= 0 for v in rep.eps_pde[level] + rep.eps_ode[level])


def test_stiff_iteration_error_decays_with_small_oscillations(burgers_references):
    # at nu = 1 the slowest error mode oscillates: the max norm may rise by a
    # few percent for one iteration, but every four iterations it drops
    rep, _ = burgers_error_study(BurgersSetup(nu=1.0), 80, refs=burgers_references[1.0])
    for level in range(2):
        tail = np.array(rep.eps_coll[level][20:])
        assert np.all(tail[1:] <= 1.2 * tail[:-1])
        assert np.all(tail[4:] < tail[:-4])
