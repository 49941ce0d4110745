"""Cross-check the mosaic against the power diagram of all k-subsets."""

import numpy as np

from orderk import PointSet, build_mosaic
from orderk.power_oracle import dual_complex, order_k_voronoi

rng = np.random.default_rng(0)
agree = 0
for trial in range(20):
    pts = rng.uniform(0, 1, (int(rng.integers(5, 12)), 2))
    for k in (1, 2, 3):
        ours = set(build_mosaic(PointSet(pts), k).index)
        tess = order_k_voronoi(pts, k)
        theirs = set(dual_complex(tess))
        agree += ours == theirs
        if trial == 0:
            print(f"k={k}: {len(tess.domains)} Voronoi domains, {len(theirs)} dual cells, "
                  f"area {sum(d.area for d in tess.domains):.4f}")
print(f"{agree} of 60 mosaics identical to the oracle")
