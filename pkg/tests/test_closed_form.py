from __future__ import annotations

import json
import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from orderk.closed_form import (
    CTable,
    ModelParams,
    cell_count_by_intervals,
    expected_area,
    expected_cell_count,
    expected_interval_count,
    lower_incomplete_gamma,
    radius_cdf,
    unit_ball_volume,
)
from orderk.errors import DomainError, MissingConstant


def area_oracle(ell, k, n, rho=1):
    """Term-by-term exact evaluation of the skeleton-area sum with sympy."""
    ell, k, n = sp.Integer(ell), sp.Integer(k), sp.Integer(n)
    c = n - ell
    total = 0
    for i in range(max(0, int(k + ell - n)), int(k)):
        total += (
            2 ** (c + 1) * sp.pi ** (c / 2) / (sp.factorial(i) * n * sp.factorial(c + 1))
            * sp.gamma((n**2 - n * ell + ell + 1) / 2)
            * sp.gamma(1 + n / 2) ** (c + ell / n)
            * sp.gamma(c + i + ell / n)
            / (sp.gamma((n**2 - n * ell + ell) / 2) * sp.gamma((n + 1) / 2) ** c * sp.gamma((ell + 1) / 2))
        )
    return sp.Rational(rho) ** (c / n) * total


def random_ctable(n, seed):
    rng = np.random.default_rng(seed)
    t = CTable(n)
    for u in range(1, n + 1):
        for v in range(1, u + 1):
            t.set(v, u, rng.uniform(0.1, 5.0))
    return t


class TestIncompleteGamma:
    def test_exponential_case(self):
        for x in (0.0, 0.3, 1.0, 7.5):
            assert lower_incomplete_gamma(1, x) == pytest.approx(1 - math.exp(-x), rel=1e-14, abs=1e-300)

    def test_zero(self):
        assert lower_incomplete_gamma(2.5, 0.0) == 0.0

    def test_known_value(self):
        assert lower_incomplete_gamma(2, 1.0) == pytest.approx(0.2642411177, abs=1e-10)
        assert lower_incomplete_gamma(2, 1.0) == pytest.approx(1 - 2 / math.e, rel=1e-14)

    def test_infinity_is_complete_gamma(self):
        for a in (0.5, 1, 3, 12.5):
            assert lower_incomplete_gamma(a, math.inf) == pytest.approx(math.gamma(a), rel=1e-14)

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.5, 7.0, 20.0])
    @pytest.mark.parametrize("x", [1e-3, 0.5, 2.0, 10.0, 40.0])
    def test_against_quadrature(self, a, x):
        mpmath.mp.dps = 30
        ref = mpmath.quad(lambda t: t ** (a - 1) * mpmath.e ** (-t), [0, min(x, a), x])
        assert lower_incomplete_gamma(a, x) == pytest.approx(float(ref), rel=1e-12)

    def test_vectorized(self):
        out = lower_incomplete_gamma(3, np.array([0.0, 1.0, np.inf]))
        np.testing.assert_allclose(out, [0.0, float(mpmath.gammainc(3, 0, 1)), 2.0], rtol=1e-13)

    def test_domain(self):
        with pytest.raises(DomainError):
            lower_incomplete_gamma(0, 1.0)
        with pytest.raises(DomainError):
            lower_incomplete_gamma(1, -1.0)


class TestExpectedArea:
    @pytest.mark.parametrize("k,ell,value", [(1, 0, 2.0), (1, 1, 2.0), (2, 0, 6.0)])
    def test_planar_values(self, k, ell, value):
        assert expected_area(ell, ModelParams(2, k)) == pytest.approx(value, abs=1e-9)

    def test_classical_spatial_values(self):
        # Poisson-Voronoi in space: 24 pi^2 / 35 vertices per unit volume
        assert expected_area(0, ModelParams(3, 1)) == pytest.approx(24 * math.pi**2 / 35, rel=1e-12)
        assert expected_area(1, ModelParams(3, 1)) == pytest.approx(5.83186, rel=1e-5)
        assert expected_area(2, ModelParams(3, 1)) == pytest.approx(2.91044, rel=1e-5)

    @pytest.mark.parametrize("n", range(1, 6))
    @pytest.mark.parametrize("k", [1, 2, 3, 7])
    def test_against_symbolic_evaluation(self, n, k):
        for ell in range(n):
            ref = float(sp.N(area_oracle(ell, k, n), 30))
            assert expected_area(ell, ModelParams(n, k)) == pytest.approx(ref, rel=1e-12)

    def test_top_dimension_is_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n, k = int(rng.integers(1, 9)), int(rng.integers(1, 21))
            assert expected_area(n, ModelParams(n, k, float(rng.uniform(0.1, 10)))) == 1.0

    def test_finite_and_positive(self):
        for n in range(1, 9):
            for k in range(1, 21):
                for ell in range(n):
                    val = expected_area(ell, ModelParams(n, k))
                    assert math.isfinite(val) and val > 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 20), st.floats(0.01, 100), st.data())
    def test_scaling_law(self, n, k, rho, data):
        ell = data.draw(st.integers(0, n))
        base = expected_area(ell, ModelParams(n, k))
        assert expected_area(ell, ModelParams(n, k, rho)) == pytest.approx(rho ** ((n - ell) / n) * base, rel=1e-12)

    def test_vertices_grow_with_order(self):
        vals = [expected_area(0, ModelParams(2, k)) for k in range(1, 6)]
        # in the plane the vertex intensity is 2(2k - 1)
        np.testing.assert_allclose(vals, [2 * (2 * k - 1) for k in range(1, 6)], rtol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            expected_area(3, ModelParams(2, 1))
        with pytest.raises(DomainError):
            ModelParams(2, 0)


class TestIntervalCounts:
    def test_inadmissible_is_zero(self):
        assert expected_interval_count(1, 2, 2, ModelParams(2, 1), random_ctable(2, 0)) == 0.0

    def test_zero_radius(self):
        t = random_ctable(2, 0)
        assert expected_interval_count(1, 2, 1, ModelParams(2, 3, r0=0.0), t) == 0.0

    def test_points_are_order_one_vertices(self):
        for r0 in (0.0, 1.0, math.inf):
            assert expected_interval_count(0, 0, 1, ModelParams(2, 1, 3.0, 2.0, r0), None) == 6.0
        assert expected_interval_count(0, 0, 1, ModelParams(2, 2), None) == 0.0

    def test_missing_constant(self):
        with pytest.raises(MissingConstant):
            expected_interval_count(1, 2, 1, ModelParams(2, 1), None)
        with pytest.raises(MissingConstant):
            expected_interval_count(1, 2, 1, ModelParams(2, 1), CTable(2))

    def test_formula(self):
        t = random_ctable(2, 1)
        p = ModelParams(2, 3, rho=2.0, volume=5.0, r0=0.7)
        x = 2.0 * math.pi * 0.7**2
        ref = float(mpmath.gammainc(2 + 3 - 2, 0, x)) / (math.factorial(1) * math.gamma(2)) * t[1, 2] * 10.0
        assert expected_interval_count(1, 2, 2, p, t) == pytest.approx(ref, rel=1e-12)

    def test_critical_vertex_vanishes_above_order(self):
        t = random_ctable(2, 1)
        assert expected_interval_count(2, 2, 3, ModelParams(2, 2), t) == 0.0
        assert expected_interval_count(2, 2, 3, ModelParams(2, 3), t) > 0.0


class TestCellCounts:
    @pytest.mark.parametrize("n", range(1, 5))
    @pytest.mark.parametrize("k", range(1, 6))
    def test_aggregation_identity(self, n, k):
        t = random_ctable(n, 10 * n + k)
        for r0 in (0.4, 1.3, math.inf):
            p = ModelParams(n, k, rho=1.7, volume=2.0, r0=r0)
            for j in range(n + 1):
                assert expected_cell_count(j, p, t) == pytest.approx(cell_count_by_intervals(j, p, t), rel=1e-12)

    def test_symbolic_aggregation(self):
        # with symbolic constants, each dimension is linear in the C's with the
        # face counts as coefficients
        n, k = 2, 2
        C = {(v, u): sp.Symbol(f"C{v}{u}") for u in range(1, n + 1) for v in range(1, u + 1)}
        from orderk.combinatorics import interval_types, n_faces
        expr = {j: 0 for j in range(n + 1)}
        for v, u, g in interval_types(n, k):
            pref = sp.gamma(u + k - g) / (sp.factorial(k - g) * sp.gamma(u))
            for j in range(n + 1):
                expr[j] += n_faces(v, g, u, j) * pref * C[(v, u)]
        rng = np.random.default_rng(3)
        for _ in range(5):
            t = CTable(n)
            vals = {}
            for (v, u), s in C.items():
                vals[s] = float(rng.uniform(0.1, 3))
                t.set(v, u, vals[s])
            for j in range(n + 1):
                assert expected_cell_count(j, ModelParams(n, k), t) == pytest.approx(float(expr[j].subs(vals)), rel=1e-12)

    def test_order_one_vertices(self):
        assert expected_cell_count(0, ModelParams(2, 1, 2.5, 4.0)) == 10.0

    def test_zero_radius(self):
        t = random_ctable(3, 2)
        for k in (2, 3, 4):
            for j in range(4):
                assert expected_cell_count(j, ModelParams(3, k, r0=0.0), t) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_planar_euler_relation(self, seed):
        # for k >= 2 the expected Euler sum vanishes whatever the constants
        t = random_ctable(2, seed)
        for k in range(2, 7):
            d = [expected_cell_count(j, ModelParams(2, k, 1.3), t) for j in range(3)]
            assert d[0] - d[1] + d[2] == pytest.approx(0.0, abs=1e-12 * d[1])

    @pytest.mark.parametrize("c22", [0.3, 1.0, 1.7])
    def test_duality_with_voronoi_vertices(self, c22):
        # constants consistent at k = 1 (one point per vertex, two triangles and
        # three edges per point) give as many triangles as Voronoi vertices at every k
        t = CTable(2)
        t.set(2, 2, c22)
        t.set(1, 2, 2 - c22)
        t.set(1, 1, 1 + c22)
        for k in range(1, 8):
            p = ModelParams(2, k)
            assert expected_cell_count(2, p, t) == pytest.approx(expected_area(0, p), rel=1e-12)

    def test_missing(self):
        with pytest.raises(MissingConstant):
            expected_cell_count(1, ModelParams(2, 1))


class TestRadiusCdf:
    def test_limits_and_monotone(self):
        t = random_ctable(2, 4)
        p = ModelParams(2, 2)
        r = np.linspace(0, 5, 200)
        F = radius_cdf(2, p, t, r)
        assert F[0] == 0.0 and radius_cdf(2, p, t, math.inf) == pytest.approx(1.0)
        assert np.all(np.diff(F) >= -1e-15)

    def test_triangles_at_order_two_are_free_of_constants(self):
        # both interval types that contain 2-cells enter with the same constant
        a, b = random_ctable(2, 5), random_ctable(2, 6)
        p = ModelParams(2, 2)
        r = np.linspace(0.01, 2, 50)
        x = math.pi * r**2
        ref = np.array([float(mpmath.gammainc(3, 0, xi) + mpmath.gammainc(2, 0, xi)) / 3 for xi in x])
        np.testing.assert_allclose(radius_cdf(2, p, a, r), ref, rtol=1e-12)
        np.testing.assert_allclose(radius_cdf(2, p, b, r), ref, rtol=1e-12)


class TestCTable:
    def test_json_round_trip(self, tmp_path):
        t = random_ctable(3, 0)
        t.set(1, 1, 2.0, 0.01, "estimated seed=1")
        f = tmp_path / "c.json"
        t.save(f, config={"L": 30})
        data = json.loads(f.read_text())
        assert data["n"] == 3 and {"v", "u", "C", "stderr", "provenance"} <= set(data["entries"][0])
        back = CTable.load(f)
        assert back.entries == t.entries

    def test_validation(self):
        t = CTable(2)
        with pytest.raises(DomainError):
            t.set(0, 1, 1.0)
        with pytest.raises(DomainError):
            t.set(1, 3, 1.0)
        with pytest.raises(DomainError):
            t.set(1, 1, -1.0)

    def test_unit_ball(self):
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
