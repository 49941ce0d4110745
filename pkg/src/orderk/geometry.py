"""Geometric primitives on finite point sets, optionally on a flat torus.

Distances on a periodic box use the minimum-image convention, which is only
safe for spheres of radius below ``L/4``; every routine that could be fooled
by the wrap-around checks this and raises :class:`PeriodicCutoffExceeded`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousSide,
    DegenerateTuple,
    InsufficientPoints,
    PeriodicCutoffExceeded,
    UnsupportedDimension,
)

EPS = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class PointSet:
    """Labeled points in the plane or in space.

    Labels are row indices of ``points``. ``box`` is the side length of a
    periodic cube, or ``None`` for points in unbounded Euclidean space.
    """

    points: np.ndarray
    box: float | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValueError("points must be an (N, dim) array")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.box is not None:
            box = float(self.box)
            if not box > 0:
                raise ValueError("periodic box side must be positive")
            if pts.size and (pts.min() < 0 or pts.max() >= box):
                raise ValueError("periodic coordinates must lie in [0, L)")
            object.__setattr__(self, "box", box)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def periodic(self) -> bool:
        return self.box is not None

    def __len__(self):
        return self.points.shape[0]

    def wrap(self, x):
        """Map coordinates into the fundamental domain ``[0, L)``."""
        x = np.asarray(x, dtype=float)
        if self.box is None:
            return x
        w = np.mod(x, self.box)
        # np.mod can return exactly L for tiny negative inputs
        return np.where(w >= self.box, 0.0, w)

    def displacement(self, origin, labels=None) -> np.ndarray:
        """Vectors from ``origin`` to the points (minimum image on a torus)."""
        pts = self.points if labels is None else self.points[np.asarray(labels, dtype=int)]
        d = pts - np.asarray(origin, dtype=float)
        if self.box is not None:
            d -= self.box * np.round(d / self.box)
        return d

    def distances(self, p, labels=None) -> np.ndarray:
        return np.linalg.norm(self.displacement(p, labels), axis=-1)

    def translated(self, shift) -> "PointSet":
        return PointSet(self.wrap(self.points + np.asarray(shift, dtype=float)), self.box)

    def local_coords(self, labels) -> np.ndarray:
        """Coordinates of a tuple unwrapped around its first point."""
        labels = list(labels)
        base = self.points[labels[0]]
        return base + self.displacement(base, labels)

    def check_radius(self, radius: float) -> None:
        if self.box is not None and not radius < self.box / 4:
            raise PeriodicCutoffExceeded(
                f"radius {radius:.6g} is not below L/4 = {self.box / 4:.6g}"
            )


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("sphere radius must be nonnegative")


@dataclass(frozen=True)
class SphereClassification:
    inn_set: frozenset
    onn_set: frozenset

    @property
    def inn(self) -> int:
        return len(self.inn_set)

    @property
    def onn(self) -> int:
        return len(self.onn_set)


@dataclass(frozen=True)
class VisibilityReport:
    visible_facets: frozenset  # facet i is U minus its i-th vertex
    V: frozenset  # labels
    barycentric: tuple = field(default=(), compare=False)

    @property
    def v(self) -> int:
        return len(self.V) - 1


def on_tolerance(radius: float) -> float:
    return EPS * max(1.0, radius)


def _classify(dist: np.ndarray, radius: float) -> SphereClassification:
    tol = on_tolerance(radius)
    inn = np.flatnonzero(dist < radius - tol)
    onn = np.flatnonzero(np.abs(dist - radius) <= tol)
    return SphereClassification(frozenset(inn.tolist()), frozenset(onn.tolist()))


def delaunay_sphere(X: PointSet, p, k: int) -> tuple[Sphere, SphereClassification]:
    """Smallest sphere centered at ``p`` with at least ``k`` points inside or on it."""
    if k < 1:
        raise ValueError("k must be positive")
    if len(X) < k:
        raise InsufficientPoints(f"need at least {k} points, have {len(X)}")
    p = np.asarray(p, dtype=float)
    dist = X.distances(p)
    radius = float(np.partition(dist, k - 1)[k - 1])
    X.check_radius(radius)
    return Sphere(X.wrap(p), radius), _classify(dist, radius)


def count_inside(X: PointSet, s: Sphere) -> SphereClassification:
    X.check_radius(s.radius)
    return _classify(X.distances(s.center), s.radius)


def _frame(coords: np.ndarray, labels=None):
    """Edge vectors from the first vertex and their Gram matrix."""
    E = coords[1:] - coords[0]
    G = E @ E.T
    if E.shape[0]:
        cond = np.linalg.cond(G)
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise DegenerateTuple("points are not affinely independent", labels)
    return E, G


def circumsphere_of(coords, labels=None) -> tuple[np.ndarray, float, np.ndarray]:
    """Center, radius and barycentric coordinates of the smallest sphere through ``coords``.

    The center is sought in the affine hull of the points, where it is unique.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    u = coords.shape[0] - 1
    if u > coords.shape[1]:
        raise DegenerateTuple("more than dim+1 points", labels)
    if u == 0:
        return coords[0].copy(), 0.0, np.ones(1)
    E, G = _frame(coords, labels)
    mu = np.linalg.solve(G, 0.5 * np.einsum("ij,ij->i", E, E))
    offset = mu @ E
    bary = np.concatenate(([1.0 - mu.sum()], mu))
    return coords[0] + offset, float(np.linalg.norm(offset)), bary


def barycentric(coords, p, labels=None) -> np.ndarray:
    """Barycentric coordinates of ``p`` (assumed in the affine hull) w.r.t. ``coords``."""
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    if coords.shape[0] == 1:
        return np.ones(1)
    E, G = _frame(coords, labels)
    mu = np.linalg.solve(G, E @ (np.asarray(p, dtype=float) - coords[0]))
    return np.concatenate(([1.0 - mu.sum()], mu))


def smallest_circumsphere(X: PointSet, U: Sequence[int]) -> Sphere:
    """Smallest sphere passing through the points labeled ``U``."""
    U = list(U)
    if not 1 <= len(U) <= X.dim + 1:
        raise DegenerateTuple(f"tuple size must be between 1 and {X.dim + 1}", U)
    center, radius, _ = circumsphere_of(X.local_coords(U), U)
    return Sphere(X.wrap(center), radius)


def visibility_partition(X: PointSet, U: Sequence[int], p) -> VisibilityReport:
    """Facets of conv(U) that separate ``p`` from the simplex, within aff(U).

    Facet ``i`` (the one opposite vertex ``i``) is visible exactly when the
    ``i``-th barycentric coordinate of ``p`` is negative.
    """
    U = list(U)
    if len(U) < 2:
        raise DegenerateTuple("visibility needs at least two points", U)
    coords = X.local_coords(U)
    p = coords[0] + _rel(X, coords[0], p)
    lam = barycentric(coords, p, U)
    if np.any(np.abs(lam) <= EPS):
        raise AmbiguousSide("center lies on the hull of a facet", U)
    visible = frozenset(np.flatnonzero(lam < 0).tolist())
    V = frozenset(U[i] for i in range(len(U)) if lam[i] > 0)
    return VisibilityReport(visible, V, tuple(lam.tolist()))


def _rel(X: PointSet, origin, p) -> np.ndarray:
    d = np.asarray(p, dtype=float) - origin
    if X.box is not None:
        d -= X.box * np.round(d / X.box)
    return d


def interior_of_hull(U, p) -> bool:
    """True iff ``p`` lies in the relative interior of the simplex spanned by ``U``.

    ``U`` is a sequence of coordinate vectors; ``p`` must lie in their affine hull.
    """
    coords = np.atleast_2d(np.asarray(U, dtype=float))
    if coords.shape[0] == 1:
        return bool(np.allclose(coords[0], p, atol=EPS))
    return bool(np.all(barycentric(coords, p) > EPS))


def require_dim(X: PointSet, dims=(2, 3)) -> None:
    if X.dim not in dims:
        raise UnsupportedDimension(f"dimension {X.dim} not in {tuple(dims)}")


def read_points_csv(path, box: float | None = None) -> PointSet:
    """Read ``x,y`` or ``x,y,z`` rows; ``#`` comments and a header line are skipped."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            if rows:
                raise ValueError(f"malformed point row: {line!r}") from None
            continue  # header
    if not rows:
        raise InsufficientPoints(f"no points in {path}")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("rows have inconsistent dimension")
    return PointSet(np.array(rows), box)


def jitter(X: PointSet, sigma: float, seed: int | None = None) -> PointSet:
    """Return a copy with seeded Gaussian noise added to every coordinate."""
    rng = np.random.default_rng(seed)
    pts = X.points + rng.normal(scale=sigma, size=X.points.shape)
    return PointSet(X.wrap(pts), X.box)
