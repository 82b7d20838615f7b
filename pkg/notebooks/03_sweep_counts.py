"""Average fine sweep counts for the wave, Burgers and shear-layer setups.

The wave and Burgers tables run in about a minute.  The shear layer is
shown on a reduced 32x32 grid with a handful of steps; the full 64x64
and 128x128 runs are CLI jobs (see README).  Run with
``python3 notebooks/03_sweep_counts.py``.
"""

# %%
from mlsdc_kit.benchmarks.tables import run_cell, table_cells


def show(table_id, options=None):
    print(f"\ntable {table_id}")
    for cell in table_cells(table_id, options):
        row, info = run_cell(cell)
        ref = "" if row["paper_value"] is None else f"(published {row['paper_value']})"
        print(f"  {row['method']:5s} {row['variant'] or '-':9s} M+1={row['nodes']} nu={row['nu']}: "
              f"{row['avg_fine_sweeps']:.2f} {ref}")


# %% Wave equation, fully implicit
show(1)

# %% Burgers, single step
show(2)

# %% Shear layer on a reduced grid
show(3, {"shear": {"n_points": 32, "n_steps": 8, "dt": 1 / 32, "nodes": 5}})
