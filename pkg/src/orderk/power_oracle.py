"""Brute-force order-k Voronoi tessellation as a power diagram of k-subsets.

Every k-subset ``Q`` becomes a weighted site at its average ``x_Q`` with
weight ``w_Q = |x_Q|^2 - mean(|x|^2 for x in Q)``. Clipping a window polygon
by the half-planes ``pi_Q <= pi_P`` for all other subsets ``P`` gives the
domain of ``Q``. The dual cells are read off by classifying sample points of
the domains, edges and vertices with plain distance computations.

Deliberately independent of :mod:`orderk.mosaic`: only raw coordinates are
shared. Meant for tiny planar inputs only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BoundaryContamination, TooLarge, UnsupportedDimension

MAX_POINTS = 14
MAX_ORDER = 3
MERGE_TOL = 1e-7


@dataclass(frozen=True)
class WeightedSite:
    Q: tuple
    x: np.ndarray
    w: float

    def power(self, p) -> float:
        d = np.asarray(p, dtype=float) - self.x
        return float(d @ d - self.w)


@dataclass
class Domain:
    Q: tuple
    polygon: list  # counterclockwise vertices as (x, y) tuples

    @property
    def area(self) -> float:
        return _area(self.polygon)


@dataclass
class Tessellation:
    points: np.ndarray
    k: int
    window: tuple  # (lo, hi) corners
    domains: list


@dataclass(frozen=True)
class DualCell:
    I: tuple
    U: tuple
    dim: int
    contaminated: bool  # dual Voronoi feature touches the window boundary

    @property
    def key(self):
        return (self.I, self.U)


def weighted_sites(points, k: int) -> list:
    pts = np.asarray(points, dtype=float)
    out = []
    for Q in combinations(range(len(pts)), k):
        sub = pts[list(Q)]
        x = sub.mean(axis=0)
        out.append(WeightedSite(Q, x, float(x @ x - np.mean(np.sum(sub * sub, axis=1)))))
    return out


def _area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _clip(poly, a0, a1, c):
    """Keep the part of a convex polygon with a0*x + a1*y <= c."""
    out = []
    n = len(poly)
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        fp = a0 * p[0] + a1 * p[1] - c
        fq = a0 * q[0] + a1 * q[1] - c
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def _circumcenter(a, b, c):
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if d == 0:
        return None
    sa, sb, sc = a @ a, b @ b, c @ c
    return np.array([
        (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / d,
        (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / d,
    ])


def default_window(points, margin: float = 0.5):
    """A box containing all points and every circumcenter of a triple of them.

    Every vertex of every order-k Voronoi tessellation of the points is such a
    circumcenter, so every Voronoi feature meets the box.
    """
    pts = np.asarray(points, dtype=float)
    cloud = [p for p in pts]
    for a, b, c in combinations(pts, 3):
        cc = _circumcenter(a, b, c)
        if cc is not None and np.all(np.isfinite(cc)):
            cloud.append(cc)
    cloud = np.array(cloud)
    lo, hi = cloud.min(axis=0), cloud.max(axis=0)
    pad = margin * max(float(np.max(hi - lo)), 1.0)
    return lo - pad, hi + pad


def order_k_voronoi(points, k: int, window=None) -> Tessellation:
    """Order-k Voronoi domains, clipped to ``window``, as a power diagram of k-subsets."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise UnsupportedDimension("the power-diagram oracle is planar only")
    if len(pts) > MAX_POINTS or k > MAX_ORDER or k > len(pts):
        raise TooLarge(f"oracle limited to {MAX_POINTS} points and k <= {MAX_ORDER}")
    if window is None:
        window = default_window(pts)
    lo, hi = (np.asarray(w, dtype=float) for w in window)
    box = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    sites = weighted_sites(pts, k)
    # pi_Q(p) <= pi_P(p)  <=>  2 p.(x_P - x_Q) <= S_P - S_Q, with S = |x|^2 - w
    S = [float(s.x @ s.x - s.w) for s in sites]
    domains = []
    for i, site in enumerate(sites):
        poly = box
        for j, other in enumerate(sites):
            if i == j:
                continue
            d = other.x - site.x
            poly = _clip(poly, 2 * d[0], 2 * d[1], S[j] - S[i])
            if len(poly) < 3:
                break
        if len(poly) >= 3 and _area(poly) > MERGE_TOL**2:
            domains.append(Domain(site.Q, poly))
    return Tessellation(pts, k, (lo, hi), domains)


def _signature(points, p, k):
    d = np.linalg.norm(points - p, axis=1)
    ref = points[np.argsort(d)[k - 1]]
    # |x_i - p|^2 - |ref - p|^2 without cancellation, so ties stay resolvable far out
    g = np.einsum("ij,ij->i", points - ref, points + ref - 2 * p)
    spread = float(np.max(np.abs(points - ref)))
    tol = MERGE_TOL * spread * max(spread, 1e-3 * float(np.max(np.abs(p - ref))))
    inn = tuple(np.flatnonzero(g < -tol).tolist())
    onn = tuple(np.flatnonzero(np.abs(g) <= tol).tolist())
    return inn, onn


EDGE_SAMPLES = (0.5, 0.25, 0.75, 0.1, 0.9, 1e-2, 1 - 1e-2, 1e-3, 1 - 1e-3, 1e-5, 1 - 1e-5)


def _edge_signature(points, p, q, k):
    """Signature of an edge from an interior sample with exactly two points on the sphere.

    Every interior point of an edge has the same signature, but far from the
    data (long edges of a big window) distance ties become unresolvable, so
    several positions are tried, down to ones close to either end.
    """
    for s in EDGE_SAMPLES:
        inn, onn = _signature(points, p + s * (q - p), k)
        if len(onn) == 2:
            return inn, onn
    return None


def _on_boundary(p, lo, hi, tol):
    return bool(np.any(np.abs(p - lo) <= tol) or np.any(np.abs(p - hi) <= tol))


def dual_complex(tess: Tessellation, include_boundary: bool = True, strict: bool = False) -> dict:
    """Dual cells keyed by ``(I, U)``; vertices are keyed ``(Q, ())``.

    Features whose Voronoi polyhedron touches the window boundary are marked
    contaminated; they are dropped unless ``include_boundary``, and raise
    :class:`BoundaryContamination` when ``strict``.
    """
    pts, k = tess.points, tess.k
    lo, hi = tess.window
    tol = MERGE_TOL * max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    cells = {}

    def add(cell):
        if cell.contaminated:
            if strict:
                raise BoundaryContamination(f"feature dual to {cell.key} touches the window")
            if not include_boundary:
                return
        prev = cells.get(cell.key)
        if prev is None or (prev.contaminated and not cell.contaminated):
            cells[cell.key] = cell

    for dom in tess.domains:
        poly = [np.array(p) for p in dom.polygon]
        touches = any(_on_boundary(p, lo, hi, tol) for p in poly)
        add(DualCell(tuple(sorted(dom.Q)), (), 0, touches))
        for p, q in zip(poly, poly[1:] + poly[:1]):
            if np.linalg.norm(q - p) <= tol:
                continue
            p_b, q_b = _on_boundary(p, lo, hi, tol), _on_boundary(q, lo, hi, tol)
            if p_b and q_b and _on_boundary(0.5 * (p + q), lo, hi, tol):
                continue  # a piece of the window itself
            sig = _edge_signature(pts, p, q, k)
            if sig is None:
                continue  # edge too short to classify reliably
            add(DualCell(*sig, 1, p_b or q_b))
        for p in poly:
            if _on_boundary(p, lo, hi, tol):
                continue
            inn, onn = _signature(pts, p, k)
            if len(onn) >= 3:
                add(DualCell(inn, onn, len(onn) - 1, False))
    return cells


def classify_sample(points, p, k):
    """Inside and on sets of the order-k sphere at ``p`` by direct distance comparison."""
    return _signature(np.asarray(points, dtype=float), np.asarray(p, dtype=float), k)
