"""Monte Carlo estimation on Poisson samples of a flat torus.

Each replication draws a Poisson sample, enumerates all tuples with small
inside counts once, and reads the mosaics of every requested order off that
single table. Counts are attributed to the window by interval center, so on
the full torus there is no boundary bias.

Replication ``r`` uses the seed sequence ``SeedSequence(seed, spawn_key=(r,))``;
results do not depend on the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .closed_form import (
    CTable,
    ModelParams,
    expected_area,
    expected_cell_count,
    expected_interval_count,
)
from .combinatorics import interval_cell_total, interval_types
from .errors import BiasFlag, MissingConstant
from .geometry import PointSet
from .mosaic import (
    assemble,
    audit_cutoff,
    auto_r_max,
    check_mosaic,
    find_tuples,
    intervals_from_tuples,
    voronoi_skeleton_measure,
)

RADIUS_BINS = 256


def sample_poisson(L: float, rho: float, seed, n: int = 2) -> PointSet:
    """Stationary Poisson sample of intensity ``rho`` on the torus ``[0, L)^n``."""
    if not (L > 0 and rho > 0):
        raise ValueError("box side and intensity must be positive")
    rng = np.random.default_rng(seed)
    count = rng.poisson(rho * L**n)
    return PointSet(rng.uniform(0.0, L, size=(count, n)), L)


def replication_seed(seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(rep,))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 2
    orders: tuple = (1, 2, 3)
    rho: float = 1.0
    L: float = 30.0
    reps: int = 50
    r0: float = math.inf
    window: tuple | None = None  # (lo, hi) sub-box for center counting; None = whole torus
    seed: int = 0
    r_max: float | None = None  # None: cutoff from a covering bound, provably complete
    threads: int = 1
    check_samples: int = 1000
    skeleton: bool = True
    keep_radii: bool = True

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(k) for k in self.orders))
        if self.reps < 2:
            raise ValueError("need at least two replications for standard errors")
        if not self.orders or min(self.orders) < 1:
            raise ValueError("orders must be positive integers")
        if self.n not in (2, 3):
            raise ValueError("simulation supports n = 2 and n = 3")
        if math.isfinite(self.r0) and not self.L > 8 * self.r0:
            raise ValueError("box side must exceed 8 * r0")
        if self.window is not None:
            lo, hi = (np.asarray(w, dtype=float) for w in self.window)
            if np.any(lo < 0) or np.any(hi > self.L) or np.any(hi <= lo):
                raise ValueError("window must be a sub-box of the torus")

    @property
    def volume(self) -> float:
        if self.window is None:
            return self.L**self.n
        lo, hi = (np.asarray(w, dtype=float) for w in self.window)
        return float(np.prod(hi - lo))

    def to_json(self) -> dict:
        d = asdict(self)
        d["r0"] = None if math.isinf(self.r0) else self.r0
        if self.window is not None:
            d["window"] = [list(map(float, w)) for w in self.window]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["r0"] = math.inf if d.get("r0") is None else d["r0"]
        if d.get("window") is not None:
            d["window"] = tuple(tuple(w) for w in d["window"])
        d["orders"] = tuple(d["orders"])
        return cls(**d)


@dataclass
class QuantityRecord:
    name: str
    mean: float
    stderr: float
    theory: float | None = None
    z: float | None = None

    @property
    def passed(self) -> bool | None:
        return None if self.z is None else abs(self.z) < 3


@dataclass
class EstimateReport:
    config: ExperimentConfig
    records: dict
    violations: dict
    biased: bool
    runtime: float
    radius_hist: dict = field(default_factory=dict)  # (k, j) -> counts over RADIUS_BINS bins
    radius_edges: np.ndarray | None = None
    radii: dict = field(default_factory=dict)  # (k, j) -> pooled radii (not serialized)
    per_rep: dict = field(default_factory=dict)  # name -> array of per-replication intensities
    version: str = __version__

    def __getitem__(self, name) -> QuantityRecord:
        return self.records[name]

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "config": self.config.to_json(),
            "seed": self.config.seed,
            "runtime_s": self.runtime,
            "biased": self.biased,
            "violations": self.violations,
            "quantities": [asdict(r) for r in self.records.values()],
            "radius_histograms": {
                f"k{k}_j{j}": h.tolist() for (k, j), h in sorted(self.radius_hist.items())
            },
            "radius_bin_edges": None if self.radius_edges is None else self.radius_edges.tolist(),
        }

    def save(self, path, include_runtime: bool = False):
        data = self.to_json()
        if not include_runtime:
            data.pop("runtime_s")  # keeps files from identical runs byte-identical
        Path(path).write_text(json.dumps(data, indent=1))

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "mean", "stderr", "theory", "z"])
            for r in self.records.values():
                w.writerow([r.name, repr(r.mean), repr(r.stderr),
                            "" if r.theory is None else repr(r.theory),
                            "" if r.z is None else repr(r.z)])


def _replicate(args):
    config, rep = args
    X = sample_poisson(config.L, config.rho, replication_seed(config.seed, rep), config.n)
    k_max = max(config.orders)
    if config.r_max is None:
        r_max = auto_r_max(X, k_max)
    else:
        r_max = float(config.r_max)
        X.check_radius(r_max)
    skeleton = config.skeleton and config.n == 2
    table = find_tuples(X, r_max, k_max - 1, edges=skeleton)
    vol = config.volume
    out = {"values": {}, "violations": {}, "biased": False, "hist": {}, "radii": {}}
    # a common range for every replication, so histograms add up
    edges = np.linspace(0.0, config.r_max or config.L / 4, RADIUS_BINS + 1)
    for k in config.orders:
        ivs = intervals_from_tuples(table, k)
        out["biased"] |= not audit_cutoff(ivs, r_max)
        mosaic = assemble(X, k, ivs, r_max, None, complete=True, coords=False)
        viol = check_mosaic(mosaic, config.check_samples, seed=rep)
        viol["n_faces"] = _face_total_mismatches(mosaic)
        for key, val in viol.items():
            out["violations"][f"{key}_k{k}"] = val
        out["violations"][f"intervals_checked_k{k}"] = len(ivs)
        inwin = [_in_window(iv.center, config.window) for iv in ivs]
        for v, u, g in interval_types(config.n, k):
            out["values"][f"intervals_v{v}u{u}g{g}_k{k}"] = 0.0
        for iv, w in zip(ivs, inwin):
            if w and iv.radius <= config.r0:
                out["values"][f"intervals_v{iv.v}u{iv.u}g{iv.g}_k{k}"] += 1.0 / vol
        counts = np.zeros(config.n + 1)
        for cell in mosaic.cells:
            if inwin[cell.owner] and cell.radius_value <= config.r0:
                counts[cell.dim] += 1
        for j in range(config.n + 1):
            out["values"][f"cells_j{j}_k{k}"] = counts[j] / vol
            radii = np.array([c.radius_value for c in mosaic.cells if c.dim == j and inwin[c.owner]])
            out["hist"][(k, j)] = np.histogram(radii, bins=edges)[0]
            if config.keep_radii:
                out["radii"][(k, j)] = radii
        if skeleton:
            for ell in (0, 1):
                out["values"][f"area_l{ell}_k{k}"] = (
                    voronoi_skeleton_measure(X, k, ell, config.window, table=table) / vol)
    out["edges"] = edges
    return out


def _face_total_mismatches(mosaic) -> int:
    per = np.bincount([c.owner for c in mosaic.cells], minlength=len(mosaic.intervals))
    return int(sum(per[i] != interval_cell_total(iv.v, iv.g, iv.u) for i, iv in enumerate(mosaic.intervals)))


def _in_window(center, window) -> bool:
    if window is None:
        return True
    lo, hi = window
    return bool(np.all(center >= np.asarray(lo)) and np.all(center < np.asarray(hi)))


def _theory(name: str, config: ExperimentConfig, ctable: CTable | None):
    kind, rest = name.split("_", 1)
    spec, ktag = rest.rsplit("_k", 1)
    params = ModelParams(config.n, int(ktag), config.rho, 1.0, config.r0)
    try:
        if kind == "area":
            return expected_area(int(spec[1:]), params) if math.isinf(config.r0) else None
        if kind == "cells":
            return expected_cell_count(int(spec[1:]), params, ctable)
        if kind == "intervals":
            v, u, g = (int(x) for x in spec[1:].replace("u", " ").replace("g", " ").split())
            return expected_interval_count(v, u, g, params, ctable)
    except MissingConstant:
        return None
    return None


def run_experiment(config: ExperimentConfig, ctable: CTable | None = None, strict_bias: bool = True) -> EstimateReport:
    """Replicate, aggregate per-unit-volume means with standard errors, attach theory."""
    start = time.perf_counter()
    jobs = [(config, r) for r in range(config.reps)]
    if config.threads > 1:
        with ProcessPoolExecutor(config.threads) as pool:
            results = list(pool.map(_replicate, jobs))
    else:
        results = [_replicate(j) for j in jobs]
    names = sorted(results[0]["values"])
    records = {}
    per_rep = {}
    for name in names:
        vals = np.array([r["values"].get(name, 0.0) for r in results])
        per_rep[name] = vals
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(len(vals)))
        theory = _theory(name, config, ctable)
        z = None
        if theory is not None:
            z = (mean - theory) / se if se > 0 else (0.0 if mean == theory else math.inf)
        records[name] = QuantityRecord(name, mean, se, theory, z)
    violations = {}
    for r in results:
        for key, val in r["violations"].items():
            violations[key] = violations.get(key, 0) + int(val)
    biased = any(r["biased"] for r in results)
    hist = {key: sum(r["hist"][key] for r in results) for key in results[0]["hist"]}
    radii = {key: np.concatenate([r["radii"][key] for r in results]) for key in results[0]["radii"]}
    report = EstimateReport(config, records, violations, biased, time.perf_counter() - start,
                            hist, results[0]["edges"], radii, per_rep)
    if biased and strict_bias:
        raise BiasFlag("an interval radius came within 1% of the cutoff r_max")
    return report


def estimate_ctable(n: int, config: ExperimentConfig) -> tuple[CTable, EstimateReport]:
    """Estimate ``C[v, u]`` from order-1 interval intensities at ``r0 = inf``.

    Inverts the interval-intensity formula: the empirical intensity of type
    ``(v, u, 1)`` divided by its prefactor at ``C = 1``.
    """
    config = ExperimentConfig(**{**config.__dict__, "n": n, "orders": (1,), "r0": math.inf,
                                 "skeleton": False, "keep_radii": False})
    report = run_experiment(config)
    unit = CTable(n)
    table = CTable(n)
    for u in range(1, n + 1):
        for v in range(1, u + 1):
            unit.set(v, u, 1.0)
    params = ModelParams(n, 1, config.rho, 1.0, math.inf)
    for u in range(1, n + 1):
        for v in range(1, u + 1):
            rec = report[f"intervals_v{v}u{u}g1_k1"]
            factor = expected_interval_count(v, u, 1, params, unit)
            if rec.mean > 0:
                table.set(v, u, rec.mean / factor, rec.stderr / factor,
                          f"estimated seed={config.seed} reps={config.reps} L={config.L}")
    return table, report


def predict_intervals(report: EstimateReport, ctable: CTable) -> dict:
    """Compare per-type interval intensities with predictions from ``ctable``.

    The standard error combines the replication spread of the empirical mean
    with the propagated error of the constant.
    """
    config = report.config
    out = {}
    for name, rec in report.records.items():
        if not name.startswith("intervals_"):
            continue
        spec, ktag = name[len("intervals_"):].rsplit("_k", 1)
        v, u, g = (int(x) for x in spec[1:].replace("u", " ").replace("g", " ").split())
        params = ModelParams(config.n, int(ktag), config.rho, 1.0, config.r0)
        pred = expected_interval_count(v, u, g, params, ctable)
        se_c = 0.0
        if u > 0:
            entry = ctable.entries[(v, u)]
            se_c = pred / entry.value * (entry.stderr or 0.0)
        se = math.hypot(rec.stderr, se_c)
        z = (rec.mean - pred) / se if se > 0 else 0.0
        out[name] = QuantityRecord(name, rec.mean, se, pred, z)
    return out


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between an empirical sample and a distribution function."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    F = np.asarray(cdf(x), dtype=float)
    hi = np.arange(1, n + 1) / n - F
    lo = F - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))
