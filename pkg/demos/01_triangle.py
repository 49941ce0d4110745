"""Order-2 mosaic of the unit equilateral triangle, interval by interval."""

import math

import numpy as np

from orderk import PointSet, build_mosaic

X = PointSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]]))

for k in (1, 2, 3):
    M = build_mosaic(X, k)
    print(f"\norder {k}: {len(M.intervals)} intervals, cells by dimension {M.counts()}")
    for n_iv, iv in enumerate(M.intervals):
        kind = "critical" if iv.critical else "regular"
        print(f"  U={iv.U} type={iv.type} radius={iv.radius:.6f} inside={sorted(iv.I)} ({kind})")
        for cell in M.cells:
            if cell.owner == n_iv:
                corners = np.round(cell.vertex_coords, 4).tolist()
                print(f"      {cell.dim}-cell I={sorted(cell.I)} U={sorted(cell.U)} corners={corners}")

# At order 2 the three edge midpoints are critical vertices at radius 1/2, and
# the circumcircle (radius sqrt(3)/3) contributes the triangle with its edges.
