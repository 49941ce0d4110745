"""Expected skeleton areas and cell counts of order-k Poisson tessellations.

All gamma-function products are evaluated in log space; the skeleton-area
formula mixes half-integer gammas raised to powers that overflow for
moderate dimensions otherwise.

The constants ``C[v, u, n]`` entering the interval intensities are not
computed here. They come in through a :class:`CTable`, either supplied by
the user or estimated by :func:`orderk.stochastic.estimate_ctable`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import special

from .combinatorics import admissible, interval_types, n_faces
from .errors import DomainError, MissingConstant

INF = math.inf


def unit_ball_volume(n: int) -> float:
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(1 + 0.5 * n))


def lower_incomplete_gamma(a, x):
    """Lower incomplete gamma function ``int_0^x t^(a-1) e^(-t) dt``.

    Accepts arrays for ``x``; ``x = inf`` gives ``Gamma(a)``.
    """
    a = float(a)
    if not a > 0:
        raise DomainError(f"lower_incomplete_gamma needs a > 0, got {a}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0)):
        raise DomainError("lower_incomplete_gamma needs x >= 0")
    with np.errstate(divide="ignore"):
        out = np.exp(np.log(special.gammainc(a, x)) + special.gammaln(a))
    return float(out) if out.ndim == 0 else out


def log_lower_incomplete_gamma(a: float, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(special.gammainc(a, x)) + special.gammaln(a)


@dataclass(frozen=True)
class ModelParams:
    """Dimension, order, intensity, window volume and radius threshold."""

    n: int
    k: int
    rho: float = 1.0
    volume: float = 1.0
    r0: float = INF

    def __post_init__(self):
        if self.n < 1 or self.k < 1:
            raise DomainError("need n >= 1 and k >= 1")
        if not self.rho > 0:
            raise DomainError("intensity must be positive")
        if not self.volume >= 0:
            raise DomainError("window volume must be nonnegative")
        if not self.r0 >= 0:
            raise DomainError("r0 must be nonnegative")

    @property
    def nu(self) -> float:
        return unit_ball_volume(self.n)

    def x(self, r=None):
        """Expected number of points in a ball of radius ``r`` (default ``r0``)."""
        r = self.r0 if r is None else r
        return self.rho * self.nu * np.asarray(r, dtype=float) ** self.n

    def with_r0(self, r0: float) -> "ModelParams":
        return replace(self, r0=r0)


def expected_area(ell: int, params: ModelParams) -> float:
    """Expected ``ell``-dimensional measure of the order-k Voronoi ``ell``-skeleton per unit volume."""
    n, k, rho = params.n, params.k, params.rho
    if ell != int(ell) or not 0 <= ell <= n:
        raise DomainError(f"ell must be an integer in [0, {n}]")
    ell = int(ell)
    if ell == n:
        return 1.0
    c = n - ell
    lg = math.lgamma
    log_const = (
        (c + 1) * math.log(2)
        + 0.5 * c * math.log(math.pi)
        - math.log(n)
        - lg(c + 2)
        + lg((n * n - n * ell + ell + 1) / 2)
        + (c + ell / n) * lg(1 + n / 2)
        - lg((n * n - n * ell + ell) / 2)
        - c * lg((n + 1) / 2)
        - lg((ell + 1) / 2)
    )
    total = 0.0
    for i in range(max(0, k + ell - n), k):
        total += math.exp(log_const + lg(c + i + ell / n) - lg(i + 1))
    return rho ** (c / n) * total


@dataclass(frozen=True)
class CEntry:
    value: float
    stderr: float | None = None
    provenance: str = "user"


@dataclass
class CTable:
    """Constants ``C[v, u]`` for one dimension ``n``."""

    n: int
    entries: dict = field(default_factory=dict)  # (v, u) -> CEntry

    def __getitem__(self, key) -> float:
        v, u = key
        try:
            return self.entries[(v, u)].value
        except KeyError:
            raise MissingConstant(f"no constant C[v={v}, u={u}] for n={self.n}") from None

    def set(self, v: int, u: int, value: float, stderr=None, provenance="user"):
        if not 1 <= v <= u <= self.n:
            raise DomainError(f"constant index out of range: v={v}, u={u}, n={self.n}")
        if not value > 0:
            raise DomainError("constants must be positive")
        self.entries[(v, u)] = CEntry(float(value), stderr, provenance)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "entries": [
                {"v": v, "u": u, "C": e.value, "stderr": e.stderr, "provenance": e.provenance}
                for (v, u), e in sorted(self.entries.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CTable":
        table = cls(int(data["n"]))
        for e in data["entries"]:
            table.set(int(e["v"]), int(e["u"]), float(e["C"]), e.get("stderr"),
                      e.get("provenance", "user"))
        return table

    def save(self, path, **extra):
        Path(path).write_text(json.dumps({**self.to_json(), **extra}, indent=2))

    @classmethod
    def load(cls, path) -> "CTable":
        return cls.from_json(json.loads(Path(path).read_text()))


def _interval_log_factor(u: int, k: int, g: int, x) -> np.ndarray:
    """log of gamma(u+k-g, x) / ((k-g)! Gamma(u))."""
    return log_lower_incomplete_gamma(u + k - g, x) - special.gammaln(k - g + 1) - special.gammaln(u)


def expected_interval_count(v: int, u: int, g: int, params: ModelParams, ctable: CTable | None) -> float:
    """Expected number of relaxed intervals of type ``(v, u, g)`` with center in the window."""
    k = params.k
    scale = params.rho * params.volume
    if u == 0:
        return scale if (v, g, k) == (0, 1, 1) else 0.0
    if not admissible(v, u, g, k) or g > k:
        return 0.0
    if ctable is None:
        raise MissingConstant(f"no C-table supplied for type (v={v}, u={u}, g={g})")
    c = ctable[v, u]
    return float(np.exp(_interval_log_factor(u, k, g, params.x()))) * c * scale


def _cell_count_terms(j: int, params: ModelParams, ctable: CTable | None):
    """Terms ``(weight, a)`` with ``E[d_j(r0)] = sum weight * gamma(a, x(r0))``.

    ``a = None`` marks a radius-independent term.
    """
    n, k = params.n, params.k
    if not 0 <= j <= n:
        raise DomainError(f"cell dimension must be in [0, {n}]")
    scale = params.rho * params.volume
    if j == 0 and k == 1:
        return [(scale, None)]
    terms = []
    lg = math.lgamma
    if j == 0:
        for u in range(1, n + 1):
            for v in range(1, min(u, k - 1) + 1):
                w = math.exp(-lg(k - v) - lg(u))
                terms.append((w * _c(ctable, v, u) * scale, u + k - v - 1))
        return terms
    for u in range(j, n + 1):
        for v in range(1, u + 1):
            for g in range(1, min(k, u) + 1):
                t0, t1 = max(0, v - j, g - j), min(v + 1, u - j, g - 1)
                mult = sum(math.comb(v + 1, t) * math.comb(u - v, t + j - v)
                           for t in range(t0, t1 + 1))
                if mult:
                    w = mult * math.exp(-lg(k - g + 1) - lg(u))
                    terms.append((w * _c(ctable, v, u) * scale, u + k - g))
    return terms


def _c(ctable, v, u):
    if ctable is None:
        raise MissingConstant(f"no C-table supplied (needed C[v={v}, u={u}])")
    return ctable[v, u]


def _evaluate_terms(terms, x):
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for w, a in terms:
        total = total + (w if a is None else w * np.exp(log_lower_incomplete_gamma(a, x)))
    return total


def expected_cell_count(j: int, params: ModelParams, ctable: CTable | None = None) -> float:
    """Expected number of ``j``-cells with center in the window and radius at most ``r0``."""
    return float(_evaluate_terms(_cell_count_terms(j, params, ctable), params.x()))


def cell_count_by_intervals(j: int, params: ModelParams, ctable: CTable | None = None) -> float:
    """Same quantity as :func:`expected_cell_count`, summed interval type by interval type."""
    total = 0.0
    for v, u, g in interval_types(params.n, params.k):
        nf = n_faces(v, g, u, j)
        if nf:
            total += nf * expected_interval_count(v, u, g, params, ctable)
    return total


def radius_cdf(j: int, params: ModelParams, ctable: CTable | None, r):
    """Distribution function of the radius of a typical ``j``-cell, evaluated at ``r``."""
    terms = _cell_count_terms(j, params, ctable)
    full = float(_evaluate_terms(terms, INF))
    if not full > 0:
        raise DomainError("no cells of this dimension are expected")
    r = np.asarray(r, dtype=float)
    out = _evaluate_terms(terms, params.x(np.maximum(r, 0.0))) / full
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out
