"""Estimate the interval constants at order one and reuse them at orders two and three."""

from orderk.closed_form import ModelParams, expected_area, expected_cell_count
from orderk.stochastic import ExperimentConfig, estimate_ctable, predict_intervals, run_experiment

table, _ = estimate_ctable(2, ExperimentConfig(L=20.0, reps=20, seed=10))
for (v, u), e in sorted(table.entries.items()):
    print(f"C[v={v}, u={u}] = {e.value:.4f} +- {e.stderr:.4f}")

# independent replications at higher order
report = run_experiment(ExperimentConfig(orders=(2, 3), L=20.0, reps=20, seed=11, skeleton=False))
for name, rec in sorted(predict_intervals(report, table).items()):
    print(f"{name:22s} observed {rec.mean:7.4f}  predicted {rec.theory:7.4f}  z={rec.z:+.2f}")

# triangles of the order-k mosaic are dual to order-k Voronoi vertices
for k in (1, 2, 3):
    p = ModelParams(2, k)
    print(f"k={k}: triangles {expected_cell_count(2, p, table):.4f}, Voronoi vertices {expected_area(0, p):.4f}")
