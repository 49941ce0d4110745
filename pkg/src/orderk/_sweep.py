"""Bisector sweep for planar point sets.

For a pair ``(a, b)`` every circle through both points has its center on the
perpendicular bisector, at signed offset ``t`` from the midpoint. A third
point ``d`` strictly left of the directed line ``ab`` is inside that circle
iff ``t > t_d``; a point strictly right of it iff ``t < t_d``, where ``t_d`` is
the offset of the circle through ``a, b, d``. Sorting the ``t_d`` of all
neighbors therefore gives the inside count of every circle through ``a`` and
``b`` at once: the diametral circle (``t = 0``), the circumcircles of all
triples containing the pair, and the pieces of the bisector on which the
count is constant (order-k Voronoi edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.spatial import cKDTree


@numba.njit(cache=True)
def _count(left, right, zero, t):
    return np.searchsorted(left, t, "left") + (right.size - np.searchsorted(right, t, "right")) + zero


@numba.njit(cache=True)
def _sweep_kernel(pts, box, nbr_ptr, nbr_idx, pairs, r_max, m_max, want_edges):
    n_pairs = pairs.shape[0]
    pair_m = np.full(n_pairs, -1, np.int64)
    tri_row = []
    tri_c = []
    tri_t = []
    tri_m = []
    edge_row = []
    edge_lo = []
    edge_hi = []
    edge_m = []
    for row in range(n_pairs):
        a = pairs[row, 0]
        b = pairs[row, 1]
        dx = pts[b, 0] - pts[a, 0]
        dy = pts[b, 1] - pts[a, 1]
        if box > 0:
            dx -= box * np.round(dx / box)
            dy -= box * np.round(dy / box)
        length = math.sqrt(dx * dx + dy * dy)
        h = 0.5 * length
        if h > r_max:
            continue
        T = math.sqrt(r_max * r_max - h * h) if r_max < np.inf else np.inf
        ux = dx / length
        uy = dy / length
        nx = -uy
        ny = ux
        lo = nbr_ptr[a]
        hi = nbr_ptr[a + 1]
        left = np.empty(hi - lo)
        right = np.empty(hi - lo)
        tc = np.empty(hi - lo)
        nl = 0
        nr = 0
        zero = 0
        for s in range(lo, hi):
            d = nbr_idx[s]
            tc[s - lo] = np.nan
            if d == a or d == b:
                continue
            qx = pts[d, 0] - pts[a, 0]
            qy = pts[d, 1] - pts[a, 1]
            if box > 0:
                qx -= box * np.round(qx / box)
                qy -= box * np.round(qy / box)
            qx -= 0.5 * dx
            qy -= 0.5 * dy
            w = qx * ux + qy * uy
            sd = qx * nx + qy * ny
            f = w * w + sd * sd - h * h
            if sd > 0:
                left[nl] = f / (2 * sd)
                tc[s - lo] = left[nl]
                nl += 1
            elif sd < 0:
                right[nr] = f / (2 * sd)
                tc[s - lo] = right[nr]
                nr += 1
            elif f < 0:
                zero += 1
        left = np.sort(left[:nl])
        right = np.sort(right[:nr])
        pair_m[row] = _count(left, right, zero, 0.0)
        for s in range(lo, hi):
            c = nbr_idx[s]
            t = tc[s - lo]
            if c <= b or np.isnan(t) or abs(t) > T:
                continue
            m = _count(left, right, zero, t)
            if m <= m_max:
                tri_row.append(row)
                tri_c.append(c)
                tri_t.append(t)
                tri_m.append(m)
        if want_edges:
            cur = _count(left, right, zero, -T) if T < np.inf else right.size + zero
            start = -T
            i = 0
            j = 0
            while True:
                if i < nl and (j >= nr or left[i] <= right[j]):
                    t = left[i]
                    step = 1
                    i += 1
                elif j < nr:
                    t = right[j]
                    step = -1
                    j += 1
                else:
                    break
                if t <= -T:
                    continue
                if t >= T:
                    break
                if cur <= m_max and t > start:
                    edge_row.append(row)
                    edge_lo.append(start)
                    edge_hi.append(t)
                    edge_m.append(cur)
                cur += step
                start = t
            if cur <= m_max and T > start:
                edge_row.append(row)
                edge_lo.append(start)
                edge_hi.append(T)
                edge_m.append(cur)
    tri = (
        np.array(tri_row, dtype=np.int64),
        np.array(tri_c, dtype=np.int64),
        np.array(tri_t, dtype=np.float64),
        np.array(tri_m, dtype=np.int64),
    )
    edges = (
        np.array(edge_row, dtype=np.int64),
        np.array(edge_lo, dtype=np.float64),
        np.array(edge_hi, dtype=np.float64),
        np.array(edge_m, dtype=np.int64),
    )
    return pair_m, tri, edges


@dataclass
class SweepResult:
    pairs: np.ndarray  # (P, 2) labels a < b
    pair_m: np.ndarray  # inside count of the diametral circle, -1 if beyond r_max
    mid: np.ndarray  # (P, 2) unwrapped midpoint
    normal: np.ndarray  # (P, 2) unit left normal of b - a
    half: np.ndarray  # (P,) half the pair distance
    tri_row: np.ndarray
    tri_c: np.ndarray
    tri_t: np.ndarray
    tri_m: np.ndarray
    edge_row: np.ndarray
    edge_lo: np.ndarray
    edge_hi: np.ndarray
    edge_m: np.ndarray


def _neighbor_csr(pts, box, radius):
    n = len(pts)
    if not np.isfinite(radius):
        idx = np.tile(np.arange(n), n)
        ptr = np.arange(0, n * n + 1, n)
        return ptr, idx
    tree = cKDTree(pts, boxsize=box)
    lists = tree.query_ball_point(pts, radius)
    lens = np.fromiter((len(x) for x in lists), dtype=np.int64, count=n)
    ptr = np.concatenate(([0], np.cumsum(lens)))
    idx = np.fromiter((i for x in lists for i in x), dtype=np.int64, count=int(ptr[-1]))
    return ptr, idx


def candidate_pairs(pts, box, r_max):
    n = len(pts)
    if not np.isfinite(r_max):
        a, b = np.triu_indices(n, 1)
        return np.stack([a, b], axis=1).astype(np.int64)
    tree = cKDTree(pts, boxsize=box)
    pairs = tree.query_pairs(2 * r_max, output_type="ndarray").astype(np.int64)
    pairs.sort(axis=1)
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def sweep(pts: np.ndarray, box: float | None, r_max: float, m_max: int, want_edges: bool = True) -> SweepResult:
    """Run the bisector sweep over all pairs closer than ``2 * r_max``."""
    pts = np.ascontiguousarray(pts, dtype=float)
    ptr, idx = _neighbor_csr(pts, box, 2 * r_max)
    pairs = candidate_pairs(pts, box, r_max)
    boxval = 0.0 if box is None else float(box)
    pair_m, tri, edges = _sweep_kernel(pts, boxval, ptr, idx, pairs, float(r_max), int(m_max), bool(want_edges))
    d = pts[pairs[:, 1]] - pts[pairs[:, 0]]
    if box is not None:
        d -= box * np.round(d / box)
    length = np.linalg.norm(d, axis=1)
    normal = np.stack([-d[:, 1], d[:, 0]], axis=1) / length[:, None]
    return SweepResult(pairs, pair_m, pts[pairs[:, 0]] + 0.5 * d, normal, 0.5 * length,
                       *tri, *edges)


@numba.njit(cache=True)
def _sweep3_kernel(pts, box, nbr_ptr, nbr_idx, r_max, m_max):
    """Spatial analogue of the planar sweep: spheres through a triple have
    centers on the axis of its circumcircle."""
    pair_out = []
    tri_out = []
    quad_out = []
    r2 = r_max * r_max
    four_r2 = 4 * r2
    max_m = 0
    for a in range(pts.shape[0]):
        max_m = max(max_m, nbr_ptr[a + 1] - nbr_ptr[a])
    rel = np.empty((max_m, 3))
    up = np.empty(max_m)
    down = np.empty(max_m)
    tq = np.empty(max_m)
    for a in range(pts.shape[0]):
        lo = nbr_ptr[a]
        M = nbr_ptr[a + 1] - lo
        for s in range(M):
            for i in range(3):
                d = pts[nbr_idx[lo + s], i] - pts[a, i]
                if box > 0:
                    d -= box * np.round(d / box)
                rel[s, i] = d
        for sb in range(M):
            b = nbr_idx[lo + sb]
            if b <= a:
                continue
            bx, by, bz = rel[sb, 0], rel[sb, 1], rel[sb, 2]
            bb = bx * bx + by * by + bz * bz
            h2 = 0.25 * bb
            if h2 <= r2:
                m = 0
                for s in range(M):
                    d = nbr_idx[lo + s]
                    if d == a or d == b:
                        continue
                    qx = rel[s, 0] - 0.5 * bx
                    qy = rel[s, 1] - 0.5 * by
                    qz = rel[s, 2] - 0.5 * bz
                    if qx * qx + qy * qy + qz * qz < h2 * (1 - 1e-12):
                        m += 1
                        if m > m_max:
                            break
                if m <= m_max:
                    pair_out.append((a, b, m))
            for sc in range(M):
                c = nbr_idx[lo + sc]
                if c <= b:
                    continue
                cx, cy, cz = rel[sc, 0], rel[sc, 1], rel[sc, 2]
                ex, ey, ez = cx - bx, cy - by, cz - bz
                if ex * ex + ey * ey + ez * ez > four_r2:
                    continue
                # circumcenter of (0, b, c) in their plane
                nx = by * cz - bz * cy
                ny = bz * cx - bx * cz
                nz = bx * cy - by * cx
                nn = nx * nx + ny * ny + nz * nz
                if nn == 0:
                    continue
                cc2 = cx * cx + cy * cy + cz * cz
                wx, wy, wz = bb * cx - cc2 * bx, bb * cy - cc2 * by, bb * cz - cc2 * bz
                ox = (wy * nz - wz * ny) / (2 * nn)
                oy = (wz * nx - wx * nz) / (2 * nn)
                oz = (wx * ny - wy * nx) / (2 * nn)
                rho2 = ox * ox + oy * oy + oz * oz
                if rho2 > r2:
                    continue
                inv = 1.0 / math.sqrt(nn)
                nx *= inv
                ny *= inv
                nz *= inv
                T = math.sqrt(r2 - rho2)
                nu = 0
                nd = 0
                zero = 0
                for s in range(M):
                    tq[s] = np.nan
                    d = nbr_idx[lo + s]
                    if d == a or d == b or d == c:
                        continue
                    qx = rel[s, 0] - ox
                    qy = rel[s, 1] - oy
                    qz = rel[s, 2] - oz
                    sd = qx * nx + qy * ny + qz * nz
                    f = qx * qx + qy * qy + qz * qz - rho2
                    if sd > 0:
                        up[nu] = f / (2 * sd)
                        tq[s] = up[nu]
                        nu += 1
                    elif sd < 0:
                        down[nd] = f / (2 * sd)
                        tq[s] = down[nd]
                        nd += 1
                    elif f < 0:
                        zero += 1
                upv = np.sort(up[:nu])
                downv = np.sort(down[:nd])
                m = _count(upv, downv, zero, 0.0)
                if m <= m_max:
                    tri_out.append((a, b, c, m))
                for s in range(M):
                    d = nbr_idx[lo + s]
                    t = tq[s]
                    if d <= c or np.isnan(t) or abs(t) > T:
                        continue
                    m = _count(upv, downv, zero, t)
                    if m <= m_max:
                        quad_out.append((a, b, c, d, m))
    return pair_out, tri_out, quad_out


def sweep3(pts: np.ndarray, box: float | None, r_max: float, m_max: int):
    """Pairs, triples and quadruples of a spatial point set with inside counts <= m_max.

    Each entry is a label tuple followed by its inside count.
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    ptr, idx = _neighbor_csr(pts, box, 2 * r_max)
    boxval = 0.0 if box is None else float(box)
    if len(pts) < 2:
        return [], [], []
    return _sweep3_kernel(pts, boxval, ptr, idx, float(r_max), int(m_max))
