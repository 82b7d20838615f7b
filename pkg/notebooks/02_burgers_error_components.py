"""Error components of one MLSDC step for viscous Burgers.

Prints the per-iteration errors against the PDE, ODE and collocation
references for both levels.  Building the references takes about ten
seconds per viscosity.  Run with
``python3 notebooks/02_burgers_error_components.py``.
"""

# %%
from mlsdc_kit.benchmarks.burgers import BurgersSetup
from mlsdc_kit.benchmarks.errors import burgers_error_study

for nu in (0.1, 1.0):
    report, _ = burgers_error_study(BurgersSetup(nu=nu), k_iterations=80)
    print(f"\nnu = {nu}: eps_N fine {report.eps_n[0]:.2e}, eps_dt fine {report.eps_dt[0]:.2e}")
    print(f"{'k':>3} {'level':>5} {'eps_pde':>10} {'eps_ode':>10} {'eps_coll':>10}")
    for k, level, pde, ode, coll, _, _ in report.rows():
        if k in (1, 2, 3, 5, 10, 20, 40, 80):
            print(f"{k:3d} {level:5d} {pde:10.2e} {ode:10.2e} {coll:10.2e}")

# %% Reading the numbers
# At nu = 0.1 the time step error is tiny and the iterates level off at the
# spatial error of the fine discretization.  At nu = 1.0 diffusion makes the
# step stiff, the temporal error dominates and the plateau sits at eps_dt.
# The coarse level is compared against the injected fine references, so its
# plateaus match the fine ones once the FAS correction has converged.
