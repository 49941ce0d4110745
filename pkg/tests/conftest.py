from __future__ import annotations

import math

import numpy as np
import pytest

from orderk.geometry import PointSet

SQ3 = math.sqrt(3.0)
TRIANGLE = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, SQ3 / 2]])


@pytest.fixture
def triangle() -> PointSet:
    return PointSet(TRIANGLE.copy())


def random_planar(seed: int, count: int, scale: float = 1.0) -> PointSet:
    rng = np.random.default_rng(seed)
    return PointSet(rng.uniform(0, scale, size=(count, 2)))


def random_torus(seed: int, L: float, rho: float = 1.0, n: int = 2) -> PointSet:
    rng = np.random.default_rng(seed)
    return PointSet(rng.uniform(0, L, size=(rng.poisson(rho * L**n), n)), L)


ACCEPTANCE: dict = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
