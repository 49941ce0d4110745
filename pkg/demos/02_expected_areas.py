"""Expected skeleton measures of order-k Poisson-Voronoi tessellations."""

from orderk import ModelParams, expected_area

for n in (2, 3):
    print(f"\nn = {n}, intensity 1, per unit volume")
    print("  k  " + "  ".join(f"ell={ell:<9d}" for ell in range(n)))
    for k in range(1, 7):
        row = [expected_area(ell, ModelParams(n, k)) for ell in range(n)]
        print(f"{k:3d}  " + "  ".join(f"{v:<13.6f}" for v in row))

# In the plane the vertex count grows like 2(2k - 1): 2, 6, 10, ...
# Changing the intensity only rescales: rho^((n - ell) / n).
print("\nscaling check, n=2 k=3 ell=1:",
      expected_area(1, ModelParams(2, 3, rho=4.0)) / expected_area(1, ModelParams(2, 3)))
