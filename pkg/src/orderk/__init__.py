"""Order-k Delaunay mosaics, relaxed discrete Morse intervals, and their Poisson statistics."""

__version__ = "0.1.0"

from .geometry import PointSet, Sphere, read_points_csv  # noqa: E402
from .mosaic import build_mosaic, enumerate_intervals, expand_interval  # noqa: E402
from .closed_form import CTable, ModelParams, expected_area, expected_cell_count  # noqa: E402

__all__ = [
    "PointSet",
    "Sphere",
    "read_points_csv",
    "build_mosaic",
    "enumerate_intervals",
    "expand_interval",
    "CTable",
    "ModelParams",
    "expected_area",
    "expected_cell_count",
]
