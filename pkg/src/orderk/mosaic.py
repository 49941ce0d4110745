"""Order-k Delaunay mosaics and their relaxed intervals.

A tuple ``U`` of ``u + 1`` points whose smallest circumsphere has ``m``
points strictly inside, with ``max(0, k - u - 1) <= m <= k - 1``, is the
upper bound of exactly one relaxed interval of the radius function (for
``m + u + 1 == k`` only when the sphere center is interior to ``conv(U)``).
Enumerating those tuples and expanding each interval into its cells
produces the whole mosaic, every cell tagged with its radius value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, product
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import _sweep
from .combinatorics import n_faces
from .errors import (
    AmbiguousSide,
    DegenerateTuple,
    DuplicateCellOwnership,
    PeriodicCutoffExceeded,
    UnsupportedDimension,
)
from .geometry import (
    EPS,
    PointSet,
    circumsphere_of,
    delaunay_sphere,
    on_tolerance,
    require_dim,
)

RMAX_MARGIN = 1.1
AUDIT_BAND = 0.99


@dataclass(frozen=True, eq=False)
class RelaxedInterval:
    U: tuple
    center: np.ndarray
    radius: float
    m: int
    I: frozenset
    g: int
    V: frozenset
    critical: bool
    vertex: bool  # upper bound is a vertex (m + u + 1 == k)

    @property
    def u(self) -> int:
        return len(self.U) - 1

    @property
    def v(self) -> int:
        return len(self.V) - 1

    @property
    def type(self) -> tuple:
        return (self.v, self.u, self.g)


@dataclass(eq=False)
class Cell:
    I: frozenset
    U: frozenset
    dim: int
    generation: int
    radius_value: float
    owner: int = -1
    vertex_coords: np.ndarray | None = None

    @property
    def key(self) -> tuple:
        return (tuple(sorted(self.I)), tuple(sorted(self.U)))


@dataclass
class TupleTable:
    """Tuples with small inside counts, before they are read at a given order."""

    X: PointSet
    r_max: float
    m_max: int
    labels: list  # sorted label tuples
    center: np.ndarray
    radius: np.ndarray
    m: np.ndarray
    bary: list  # barycentric coordinates of the center, per tuple
    sweep: object | None = None  # _sweep.SweepResult for planar input


@dataclass
class Mosaic:
    X: PointSet
    k: int
    r_max: float
    window: object
    intervals: list
    cells: list
    index: dict = field(default_factory=dict)
    complete: bool = False  # True when every interval of the whole torus is present

    def counts(self) -> list:
        out = [0] * (self.X.dim + 1)
        for c in self.cells:
            out[c.dim] += 1
        return out

    def euler_characteristic(self) -> int:
        return sum((-1) ** j * c for j, c in enumerate(self.counts()))

    def to_json(self) -> dict:
        def ints(s):
            return [int(x) for x in sorted(s)]

        return {
            "k": self.k,
            "intervals": [
                {
                    "U": list(map(int, iv.U)),
                    "center": [float(x) for x in iv.center],
                    "radius": float(iv.radius),
                    "m": int(iv.m),
                    "type": list(iv.type),
                    "critical": bool(iv.critical),
                }
                for iv in self.intervals
            ],
            "cells": [
                {
                    "I": ints(c.I),
                    "U": ints(c.U),
                    "dim": c.dim,
                    "generation": c.generation,
                    "radius": float(c.radius_value),
                    "verts": [] if c.vertex_coords is None else c.vertex_coords.tolist(),
                }
                for c in self.cells
            ],
        }

    def save(self, path, **extra):
        Path(path).write_text(json.dumps({**self.to_json(), **extra}, indent=1))


# ---------------------------------------------------------------------------
# radius cutoff


def covering_radius_bound(X: PointSet, k: int, spacing: float | None = None) -> float:
    """Upper bound on the k-th nearest neighbor distance over the whole torus.

    The k-th neighbor distance is 1-Lipschitz, so its maximum over a grid plus
    the covering radius of the grid bounds it everywhere. Every relaxed
    interval has its radius below this bound.
    """
    if X.box is None:
        raise ValueError("covering bound needs a periodic box")
    L, n = X.box, X.dim
    if spacing is None:
        spacing = 0.25 * (L**n / max(len(X), 1)) ** (1 / n)
    cells = max(int(np.ceil(L / spacing)), 1)
    h = L / cells
    axis = (np.arange(cells) + 0.5) * h
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    tree = cKDTree(X.points, boxsize=L)
    d, _ = tree.query(grid, k=[k])
    return float(d.max() + 0.5 * h * np.sqrt(n))


def auto_r_max(X: PointSet, k_max: int) -> float:
    """Cutoff that provably captures every interval up to order ``k_max`` on a torus."""
    r = RMAX_MARGIN * covering_radius_bound(X, k_max)
    X.check_radius(r)
    return r


def _resolve_r_max(X: PointSet, k_max: int, r_max):
    if r_max is None:
        return (auto_r_max(X, k_max), True) if X.periodic else (np.inf, True)
    r_max = float(r_max)
    if X.periodic:
        X.check_radius(r_max)
    return r_max, False


# ---------------------------------------------------------------------------
# tuple enumeration


def find_tuples(X: PointSet, r_max: float, m_max: int, method: str = "auto", edges: bool = False) -> TupleTable:
    """All tuples of 1..dim+1 points with circumradius <= r_max and at most m_max points inside."""
    require_dim(X)
    if X.periodic:
        X.check_radius(r_max)
    if method == "auto":
        method = "sweep"
    if method == "sweep":
        if X.dim == 3:
            return _tuples_sweep3(X, r_max, m_max)
        return _tuples_sweep(X, r_max, m_max, edges)
    return _tuples_generic(X, r_max, m_max)


def _tuples_sweep(X: PointSet, r_max, m_max, edges) -> TupleTable:
    sw = _sweep.sweep(X.points, X.box, r_max, m_max, want_edges=edges)
    n = len(X)
    labels = [(i,) for i in range(n)]
    centers = [X.points]
    radii = [np.zeros(n)]
    ms = [np.zeros(n, dtype=int)]
    bary = [(1.0,)] * n

    keep = (sw.pair_m >= 0) & (sw.pair_m <= m_max) & (sw.half <= r_max)
    labels += [tuple(p) for p in sw.pairs[keep].tolist()]
    centers.append(sw.mid[keep])
    radii.append(sw.half[keep])
    ms.append(sw.pair_m[keep])
    bary += [(0.5, 0.5)] * int(keep.sum())

    rows = sw.tri_row
    a, b = sw.pairs[rows, 0], sw.pairs[rows, 1]
    c = sw.tri_c
    cen = sw.mid[rows] + sw.tri_t[:, None] * sw.normal[rows]
    pa = X.points[a]
    db = _min_image(X, X.points[b] - pa)
    dc = _min_image(X, X.points[c] - pa)
    dp = cen - pa
    det = db[:, 0] * dc[:, 1] - db[:, 1] * dc[:, 0]
    lb = (dp[:, 0] * dc[:, 1] - dp[:, 1] * dc[:, 0]) / det
    lc = (db[:, 0] * dp[:, 1] - db[:, 1] * dp[:, 0]) / det
    la = 1.0 - lb - lc
    labels += list(zip(a.tolist(), b.tolist(), c.tolist()))
    centers.append(cen)
    radii.append(np.sqrt(sw.half[rows] ** 2 + sw.tri_t**2))
    ms.append(sw.tri_m)
    bary += list(zip(la.tolist(), lb.tolist(), lc.tolist()))
    center = np.concatenate(centers)
    return TupleTable(X, r_max, m_max, labels, X.wrap(center), np.concatenate(radii),
                      np.concatenate(ms).astype(int), bary, sw)


def _tuples_sweep3(X: PointSet, r_max, m_max) -> TupleTable:
    pairs, triples, quads = _sweep.sweep3(X.points, X.box, r_max, m_max)
    n = len(X)
    labels = [(i,) for i in range(n)]
    centers = list(X.points)
    radii = [0.0] * n
    ms = [0] * n
    bary = [(1.0,)] * n
    for rec in [*pairs, *triples, *quads]:
        U, m = rec[:-1], rec[-1]
        center, radius, lam = circumsphere_of(X.local_coords(U), U)
        if radius > r_max:
            continue
        labels.append(tuple(U))
        centers.append(center)
        radii.append(radius)
        ms.append(m)
        bary.append(tuple(lam.tolist()))
    center = np.array(centers, dtype=float).reshape(-1, X.dim)
    return TupleTable(X, r_max, m_max, labels, X.wrap(center), np.array(radii), np.array(ms, dtype=int), bary)


def _min_image(X: PointSet, d):
    if X.box is not None:
        d = d - X.box * np.round(d / X.box)
    return d


def _cliques(nbrs, size):
    """Sorted label tuples of the given size whose members are pairwise neighbors."""

    def grow(clique, cand):
        if len(clique) == size:
            yield tuple(clique)
            return
        for x in sorted(cand):
            if x > clique[-1]:
                yield from grow(clique + [x], cand & nbrs[x])

    for a in range(len(nbrs)):
        yield from grow([a], nbrs[a])


def _degenerate_matters(X: PointSet, tree, U, coords, r_max, m_max) -> bool:
    E = coords[1:] - coords[0]
    mu = np.linalg.lstsq(E @ E.T, 0.5 * np.einsum("ij,ij->i", E, E), rcond=None)[0]
    offset = mu @ E
    radius = float(np.linalg.norm(offset))
    if radius > r_max:
        return False
    inside = X.distances(coords[0] + offset) < radius * (1 - 1e-6)
    inside[list(U)] = False
    return int(inside.sum()) <= m_max


def _tuples_generic(X: PointSet, r_max, m_max) -> TupleTable:
    n = len(X)
    tree = cKDTree(X.points, boxsize=X.box)
    if np.isfinite(r_max):
        nbrs = [set(x) - {i} for i, x in enumerate(tree.query_ball_point(X.points, 2 * r_max))]
    else:
        nbrs = [set(range(n)) - {i} for i in range(n)]
    labels = [(i,) for i in range(n)]
    centers = list(X.points)
    radii = [0.0] * n
    ms = [0] * n
    bary = [(1.0,)] * n
    for size in range(2, X.dim + 2):
        for U in _cliques(nbrs, size):
            coords = X.local_coords(U)
            try:
                center, radius, lam = circumsphere_of(coords, U)
            except DegenerateTuple:
                # nearly flat tuples have enormous spheres; they only matter
                # if a least-squares sphere would make them an interval
                if _degenerate_matters(X, tree, U, coords, r_max, m_max):
                    raise
                continue
            if radius > r_max:
                continue
            if X.periodic:
                X.check_radius(radius)
            tol = on_tolerance(radius)
            near = tree.query_ball_point(X.wrap(center), radius + 2 * tol)
            dist = X.distances(center, near)
            m = int(np.sum(dist < radius - tol))
            if m > m_max:
                continue
            on = {near[i] for i in np.flatnonzero(np.abs(dist - radius) <= tol)}
            if on != set(U):
                raise AmbiguousSide("points are cospherical", sorted(on | set(U)))
            labels.append(U)
            centers.append(center)
            radii.append(radius)
            ms.append(m)
            bary.append(tuple(lam.tolist()))
    center = np.array(centers, dtype=float).reshape(-1, X.dim)
    return TupleTable(X, r_max, m_max, labels, X.wrap(center), np.array(radii), np.array(ms, dtype=int), bary)


# ---------------------------------------------------------------------------
# intervals


def _in_window(X: PointSet, center, window) -> bool:
    if window is None:
        return True
    lo, hi = (np.asarray(w, dtype=float) for w in window)
    return bool(np.all(center >= lo) and np.all(center < hi))


def _inside_sets(X: PointSet, idx, table: TupleTable) -> list:
    """Labels strictly inside (beyond the on-tolerance) each selected sphere."""
    if not len(idx):
        return []
    idx = np.asarray(idx)
    radius = table.radius[idx]
    reach = np.maximum(radius - EPS * np.maximum(1.0, radius), 0.0)
    tree = cKDTree(X.points, boxsize=X.box)
    found = tree.query_ball_point(table.center[idx], reach)
    out = []
    for i, near, r in zip(idx.tolist(), found, radius):
        out.append(frozenset(near).difference(table.labels[i]) if r > 0 else frozenset())
    return out


def intervals_from_tuples(table: TupleTable, k: int, window=None) -> list:
    """Read the relaxed intervals of order ``k`` off a tuple table."""
    if k - 1 > table.m_max:
        raise ValueError(f"tuple table holds inside counts up to {table.m_max}, order {k} needs {k - 1}")
    X = table.X
    chosen = []
    for i, U in enumerate(table.labels):
        u = len(U) - 1
        m = int(table.m[i])
        if not max(0, k - u - 1) <= m <= k - 1:
            continue
        if not _in_window(X, table.center[i], window):
            continue
        chosen.append(i)
    insides = _inside_sets(X, chosen, table)
    out = []
    for i, I in zip(chosen, insides):
        U = table.labels[i]
        u = len(U) - 1
        m = int(table.m[i])
        if len(I) != m:
            raise AmbiguousSide("inside count is not robust to rounding", U)
        lam = np.asarray(table.bary[i])
        if u > 0 and np.any(np.abs(lam) <= EPS):
            raise AmbiguousSide("circumcenter lies on the hull of a facet", U)
        Vset = frozenset(U[j] for j in range(len(U)) if lam[j] > 0)
        vertex = m + u + 1 == k
        if vertex:
            if u > 0 and len(Vset) != len(U):
                continue  # center outside conv(U): not an interval
            g = u + 1
        else:
            g = k - m
        out.append(RelaxedInterval(tuple(U), table.center[i].copy(), float(table.radius[i]), m,
                                   I, g, Vset, len(Vset) == len(U), vertex))
    return out


def enumerate_intervals(X: PointSet, k: int, r_max=None, window=None, method: str = "auto") -> list:
    """All relaxed intervals of order ``k`` with radius <= ``r_max`` and center in ``window``.

    ``window`` is ``None`` (everything) or a pair ``(lo, hi)`` of corner vectors.
    On a torus ``r_max=None`` picks a cutoff that captures every interval.
    """
    if k < 1:
        raise ValueError("k must be positive")
    r_max, _ = _resolve_r_max(X, k, r_max)
    return intervals_from_tuples(find_tuples(X, r_max, k - 1, method), k, window)


def expand_interval(iv: RelaxedInterval, k: int) -> list:
    """Cells of a relaxed interval, keyed by (inside set, on set)."""
    if iv.vertex:
        return [Cell(iv.I | frozenset(iv.U), frozenset(), 0, iv.g, iv.radius)]
    U, V, I, g = iv.U, iv.V, iv.I, iv.g
    others = [x for x in U if x not in V]
    cells = []
    if len(V) == g:
        cells.append(Cell(I | V, frozenset(), 0, g, iv.radius))
    for j in range(1, iv.u + 1):
        for t in range(max(0, g - j), g):
            for Uin in combinations(sorted(V), t):
                rest = V.difference(Uin)
                extra = j + 1 - len(rest)
                if extra < 0:
                    continue
                for more in combinations(others, extra):
                    cells.append(Cell(I | frozenset(Uin), rest | frozenset(more), j, g - t, iv.radius))
    assert len(cells) == sum(n_faces(iv.v, g, iv.u, j) for j in range(iv.u + 1)), iv.type
    return cells


def _vertex_coords(X: PointSet, cell: Cell, k: int, origin) -> np.ndarray:
    I = sorted(cell.I)
    base = X.displacement(origin, I).sum(axis=0) if I else np.zeros(X.dim)
    if cell.dim == 0:
        return (origin + base / k)[None, :]
    U = sorted(cell.U)
    dU = X.displacement(origin, U)
    g = k - len(I)
    return np.array([origin + (base + dU[list(S)].sum(axis=0)) / k for S in combinations(range(len(U)), g)])


def assemble(X: PointSet, k: int, intervals: list, r_max: float, window=None,
             complete: bool = False, coords: bool = True) -> Mosaic:
    cells = []
    index = {}
    for n_iv, iv in enumerate(intervals):
        for cell in expand_interval(iv, k):
            key = cell.key
            if key in index:
                other = cells[index[key]].owner
                raise DuplicateCellOwnership(
                    f"cell {key} claimed by intervals {intervals[other].U} and {iv.U}")
            cell.owner = n_iv
            if coords:
                cell.vertex_coords = _vertex_coords(X, cell, k, iv.center)
            index[key] = len(cells)
            cells.append(cell)
    return Mosaic(X, k, r_max, window, intervals, cells, index, complete)


def build_mosaic(X: PointSet, k: int, r_max=None, window=None, method: str = "auto", coords: bool = True) -> Mosaic:
    """Order-k Delaunay mosaic restricted to radius <= r_max and centers in ``window``.

    With ``r_max=None`` the mosaic is complete: on a torus the cutoff is
    chosen from a covering bound, for unbounded input it is infinite.
    """
    r_max, auto = _resolve_r_max(X, k, r_max)
    intervals = intervals_from_tuples(find_tuples(X, r_max, k - 1, method), k, window)
    return assemble(X, k, intervals, r_max, window, complete=auto and window is None, coords=coords)


def audit_cutoff(intervals, r_max: float) -> bool:
    """False if some interval radius comes within 1% of the cutoff."""
    if not np.isfinite(r_max):
        return True
    return all(iv.radius < AUDIT_BAND * r_max for iv in intervals)


# ---------------------------------------------------------------------------
# point classification and Voronoi skeleton


def classify_point(X: PointSet, p, k: int):
    """Inside set, on set and Voronoi-polyhedron dimension at ``p``."""
    _, cl = delaunay_sphere(X, p, k)
    if cl.inn + cl.onn == k:
        dim = X.dim
    else:
        dim = X.dim + 1 - cl.onn
    return cl.inn_set, cl.onn_set, dim


def _clip_segment(p0, p1, lo, hi):
    """Liang-Barsky clip of the segment p0 + s (p1 - p0), s in [0, 1]; returns clipped length."""
    d = p1 - p0
    s0, s1 = 0.0, 1.0
    for ax in range(len(p0)):
        if d[ax] == 0:
            if p0[ax] < lo[ax] or p0[ax] > hi[ax]:
                return 0.0
            continue
        a = (lo[ax] - p0[ax]) / d[ax]
        b = (hi[ax] - p0[ax]) / d[ax]
        if a > b:
            a, b = b, a
        s0, s1 = max(s0, a), min(s1, b)
        if s0 >= s1:
            return 0.0
    return float((s1 - s0) * np.linalg.norm(d))


def _clip_line(origin, direction, t_lo, t_hi, lo, hi):
    """Length of {origin + t direction : t_lo <= t <= t_hi} inside the box [lo, hi]."""
    s0, s1 = t_lo, t_hi
    for ax in range(len(origin)):
        if direction[ax] == 0:
            if origin[ax] < lo[ax] or origin[ax] > hi[ax]:
                return 0.0
            continue
        a = (lo[ax] - origin[ax]) / direction[ax]
        b = (hi[ax] - origin[ax]) / direction[ax]
        if a > b:
            a, b = b, a
        s0, s1 = max(s0, a), min(s1, b)
        if s0 >= s1:
            return 0.0
    return float(s1 - s0)


def skeleton_tuples(X: PointSet, k: int, r_max=None) -> TupleTable:
    require_dim(X, (2,))
    r_max, _ = _resolve_r_max(X, k, r_max)
    return find_tuples(X, r_max, k - 1, "sweep", edges=True)


def voronoi_skeleton_measure(X: PointSet, k: int, ell: int, window=None, r_max=None, table=None) -> float:
    """Number of order-k Voronoi vertices (ell=0) or length of edges (ell=1) in ``window``.

    ``window=None`` means the whole torus. For ell=1 in an unbounded plane a
    window is required. ``table`` may carry a precomputed :func:`skeleton_tuples`
    result with inside counts up to at least ``k - 1``.
    """
    if X.dim != 2:
        raise UnsupportedDimension("skeleton measures are implemented for the plane")
    if ell == 2:
        if window is None:
            if X.box is None:
                raise ValueError("the plane has infinite area; give a window")
            return X.box**2
        lo, hi = (np.asarray(w, dtype=float) for w in window)
        return float(np.prod(hi - lo))
    if ell not in (0, 1):
        raise ValueError("ell must be 0, 1 or 2")
    if table is None:
        table = skeleton_tuples(X, k, r_max)
    if ell == 0:
        total = 0
        for i, U in enumerate(table.labels):
            if len(U) == 3 and k - 2 <= table.m[i] <= k - 1 and _in_window(X, table.center[i], window):
                total += 1
        return float(total)
    sw = table.sweep
    sel = sw.edge_m == k - 1
    if window is None:
        if X.box is None:
            raise ValueError("the plane has infinite edge length; give a window")
        lengths = sw.edge_hi[sel] - sw.edge_lo[sel]
        if not np.all(np.isfinite(lengths)):
            raise PeriodicCutoffExceeded("unbounded Voronoi edge on a torus: cutoff too small")
        return float(lengths.sum())
    lo, hi = (np.asarray(w, dtype=float) for w in window)
    total = 0.0
    for row, t0, t1 in zip(sw.edge_row[sel], sw.edge_lo[sel], sw.edge_hi[sel]):
        origin, direction = sw.mid[row], sw.normal[row]
        if X.box is None:
            total += _clip_line(origin, direction, t0, t1, lo, hi)
        else:
            # on a torus the segment may cross the box edge; test every image near the window
            for shift in _images(X.box):
                total += _clip_line(origin + shift, direction, t0, t1, lo, hi)
    return total


def _images(L):
    return [np.array([i * L, j * L]) for i in (-1, 0, 1) for j in (-1, 0, 1)]


# ---------------------------------------------------------------------------
# structural audits


def check_mosaic(mosaic: Mosaic, samples: int = 1000, seed: int = 0) -> dict:
    """Count violations of the structural invariants of a mosaic.

    Keys: ``monotonicity`` (a face with larger radius than its coface),
    ``missing_faces`` (a face absent from a complete mosaic), ``euler``
    (nonzero Euler characteristic of a complete torus mosaic), ``duality``
    (Voronoi dimension at a sampled interval center disagreeing with the
    dimension of the interval's upper bound).
    """
    X, k = mosaic.X, mosaic.k
    out = {"monotonicity": 0, "missing_faces": 0, "euler": 0, "duality": 0}
    for cell in mosaic.cells:
        if cell.dim == 0:
            continue
        for face in _faces(cell, k):
            j = mosaic.index.get(face)
            if j is None:
                out["missing_faces"] += mosaic.complete
                continue
            if mosaic.cells[j].radius_value > cell.radius_value * (1 + EPS) + EPS:
                out["monotonicity"] += 1
    if mosaic.complete and X.periodic:
        out["euler"] = int(mosaic.euler_characteristic() != 0)
    rng = np.random.default_rng(seed)
    ivs = mosaic.intervals
    pick = rng.choice(len(ivs), size=min(samples, len(ivs)), replace=False) if ivs else []
    for i in pick:
        iv = ivs[i]
        _, onn, vdim = classify_point(X, iv.center, k)
        expected = X.dim if iv.vertex else X.dim - iv.u
        if vdim != expected or (not iv.vertex and onn != set(iv.U)):
            out["duality"] += 1
    return out


@lru_cache(maxsize=None)
def _colorings(size: int):
    """(in, on) index tuples for every 3-coloring of ``size`` items."""
    out = []
    for colors in product((0, 1, 2), repeat=size):
        out.append((tuple(i for i, c in enumerate(colors) if c == 0),
                    tuple(i for i, c in enumerate(colors) if c == 1)))
    return out


def _faces(cell: Cell, k: int):
    """Keys of all proper faces of a cell given by its (I, U) pair."""
    U = sorted(cell.U)
    I = cell.I
    nI = len(I)
    seen = set()
    for ins, ons in _colorings(len(U)):
        n_in, n_on = nI + len(ins), len(ons)
        if n_on == len(U) or n_in + n_on < k:
            continue
        if n_in + n_on == k:
            key = (tuple(sorted(I.union(U[i] for i in ins + ons))), ())
        elif n_on >= 2 and n_in <= k - 1:
            key = (tuple(sorted(I.union(U[i] for i in ins))), tuple(U[i] for i in ons))
        else:
            continue
        if key not in seen:
            seen.add(key)
            yield key
