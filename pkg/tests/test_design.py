import numpy as np
import pytest

from ousheet.design import (
    GeometricDesignSpec,
    SearchConfig,
    _Box,
    efficiency,
    geometric_progression_design,
    geometric_surface,
    optimal_trend_design,
    proportional_distance,
    search,
)
from ousheet.errors import DomainError
from ousheet.fisher import (
    phi,
    phi_geometric,
    trend_information,
    trend_information_equidistant,
    trend_information_geometric,
)
from ousheet.model import CovarianceParams, Region, skewed_length

from conftest import make_design

UNIT = CovarianceParams(1.0, 1.0)


class TestOptimalTrend:
    def test_spans_full_region(self):
        region = Region(1.0, 4.2, 2.0, 6.0)
        des = optimal_trend_design(5, region, CovarianceParams(0.5, 2.0))
        assert des.origin == (1.0, 2.0)
        np.testing.assert_allclose(des.d, 1.0)
        np.testing.assert_allclose(des.delta, 0.8)
        assert skewed_length(des, CovarianceParams(0.5, 2.0)) == pytest.approx(0.5 * 4 + 2.0 * 3.2)

    def test_value(self):
        des = optimal_trend_design(4, Region(0, 1, 0, 1), UNIT)
        assert trend_information(des, UNIT) == pytest.approx(trend_information_equidistant(4, 2.0), rel=1e-14)

    def test_margin_is_interior(self):
        region = Region(0, 1, 0, 1)
        des = optimal_trend_design(4, region, UNIT, margin=0.01)
        assert des.t[-1] < region.b2 and des.s[-1] < region.b1

    def test_domain(self):
        with pytest.raises(DomainError):
            optimal_trend_design(1, Region(0, 1, 0, 1), UNIT)
        with pytest.raises(DomainError):
            optimal_trend_design(3, Region(0, 1, 0, 1), UNIT, margin=1.0)


class TestGeometric:
    def test_fractions_sum_to_span(self):
        des = geometric_progression_design(GeometricDesignSpec(6, 0.4, 0.9, spans=(2.0, 3.0)))
        assert des.d.sum() == pytest.approx(2.0, rel=1e-14)
        assert des.delta.sum() == pytest.approx(3.0, rel=1e-14)
        np.testing.assert_allclose(des.d[1:] / des.d[:-1], 0.4, rtol=1e-13)

    def test_unit_ratio(self):
        des = geometric_progression_design(GeometricDesignSpec(5, 1.0, 1.0))
        np.testing.assert_allclose(des.d, 0.25)

    def test_closed_forms_match_design(self):
        p = CovarianceParams(2.5, 1.5)
        spec = GeometricDesignSpec(5, 0.3, 0.7, spans=(1.2, 0.8))
        des = geometric_progression_design(spec)
        assert trend_information_geometric(5, 0.3, 0.7, p, spec.spans) == pytest.approx(trend_information(des, p), rel=1e-14)
        assert phi_geometric(5, 0.3, 0.7, p, spec.spans) == pytest.approx(phi(des, p), rel=1e-12)

    @pytest.mark.parametrize("r", [0.0, -0.1, 1.5])
    def test_bad_ratio(self, r):
        with pytest.raises(DomainError):
            GeometricDesignSpec(5, r, 0.5)


class TestSurface:
    def test_resolution_two(self):
        rows = geometric_surface(5, UNIT, 2)
        assert rows.shape == (4, 5)
        np.testing.assert_array_equal(rows[:, :2], [[0.5, 0.5], [0.5, 1.0], [1.0, 0.5], [1.0, 1.0]])

    def test_diagonal_zero(self):
        rows = geometric_surface(5, CovarianceParams(0.5, 0.8), 10)
        diag = rows[rows[:, 0] == rows[:, 1]]
        assert np.all(diag[:, 3] == 0) and np.all(diag[:, 4] == 0)
        off = rows[rows[:, 0] != rows[:, 1]]
        assert np.all(off[:, 3] > 0) and np.all(off[:, 4] > 0)

    def test_resolution_validation(self):
        with pytest.raises(DomainError):
            geometric_surface(5, UNIT, 1)


def test_efficiency():
    assert efficiency(1.0, 2.0) == 0.5
    with pytest.raises(DomainError):
        efficiency(1.0, 0.0)


def test_proportional_distance():
    assert proportional_distance(make_design([0.1, 0.3], [0.2, 0.6])) == pytest.approx(0.0, abs=1e-15)
    assert proportional_distance(make_design([0.1, 0.3], [0.2, 0.3])) == pytest.approx(1.0)


class TestBox:
    def test_projection_feasible(self, rng):
        box = _Box(4, CovarianceParams(2.0, 0.5), (1.0, 3.0), 1e-3)
        for _ in range(50):
            d, delta = box.project(rng.normal(size=8) * 2)
            assert d.sum() <= 1.0 + 1e-12 and delta.sum() <= 3.0 + 1e-12
            assert np.all(2.0 * d >= 1e-3 * (1 - 1e-12)) and np.all(0.5 * delta >= 1e-3 * (1 - 1e-12))

    def test_projection_is_identity_inside(self):
        box = _Box(2, UNIT, (1.0, 1.0), 1e-3)
        x = np.array([0.2, 0.3, 0.1, 0.4])
        d, delta = box.project(x)
        np.testing.assert_array_equal(np.concatenate((d, delta)), x)

    def test_infeasible_floor(self):
        with pytest.raises(DomainError):
            _Box(10, UNIT, (1.0, 1.0), 0.2)

    def test_boundary_flags(self):
        box = _Box(2, UNIT, (1.0, 1.0), 1e-3)
        flags = box.boundary(np.array([0.5, 0.5]), np.array([1e-3, 0.2]), 1e-6)
        assert flags == ["span", "span", "floor", None]


class TestSearchConfig:
    def test_validation(self):
        r = Region(0, 1, 0, 1)
        with pytest.raises(DomainError):
            SearchConfig("volume", 3, r)
        with pytest.raises(DomainError):
            SearchConfig("phi", 1, r)
        with pytest.raises(DomainError):
            SearchConfig("phi", 3, r, starts=0)
        with pytest.raises(DomainError):
            SearchConfig("phi", 3, r, floor=0.0)


class TestSearch:
    def test_trend_recovers_equidistant(self):
        cfg = SearchConfig("trend", 3, Region(0, 1, 0, 1), starts=3, seed=4)
        res = search(cfg, UNIT)
        assert res.best_value == pytest.approx(trend_information_equidistant(3, 2.0), abs=1e-6)
        # any design with equal skewed increments is optimal, not only the diagonal one
        x = res.best_design.d + res.best_design.delta
        np.testing.assert_allclose(x, 1.0, atol=1e-3)

    def test_deterministic(self):
        cfg = SearchConfig("phi", 3, Region(0, 1, 0, 1), starts=2, seed=11)
        a, b = search(cfg, UNIT), search(cfg, UNIT)
        assert a.best_value == b.best_value
        np.testing.assert_array_equal(a.best_design.d, b.best_design.d)

    def test_phi_reports_boundary(self):
        cfg = SearchConfig("phi", 3, Region(0, 1, 0, 1), starts=4, seed=2)
        res = search(cfg, CovarianceParams(0.5, 0.8))
        assert res.improved
        for run in res.runs:
            if run.improved:
                assert run.at_boundary
            assert len(run.boundary) == 4
        assert len(res.boundary_diagnostics()) == 4

    def test_critical_points_lie_on_family(self):
        cfg = SearchConfig("psi", 3, Region(0, 1, 0, 1), starts=4, seed=0)
        res = search(cfg, UNIT)
        for cp in res.critical_points:
            assert cp.family_distance < 1e-6
            assert cp.value < 1e-12

    def test_origin_follows_region(self):
        cfg = SearchConfig("trend", 3, Region(2.0, 3.0, 5.0, 6.0), starts=1)
        res = search(cfg, UNIT)
        assert res.best_design.origin == (2.0, 5.0)
