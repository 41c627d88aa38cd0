import math

import pytest

from ousheet.model import CovarianceParams
from ousheet.oracle import trend_information_oracle
from ousheet.reproduce import (
    compute_values,
    highway_monotone_design,
    highway_scattered_design,
    load_reference,
    published_grid_formula,
    reference_table,
    tolerance_for,
    vertex_grid_information,
)


def test_reference_file_is_complete():
    ids = {e["id"] for e in load_reference()["entries"]}
    values = compute_values()
    for e in load_reference()["entries"]:
        if not e.get("unavailable"):
            assert e["id"] in values
    assert len(ids) == len(load_reference()["entries"])


def test_no_unexpected_mismatch():
    rows = reference_table()
    assert [r.id for r in rows if r.status == "mismatch"] == []
    assert {r.status for r in rows} <= {"ok", "annotated", "unavailable"}


def test_unavailable_rows_carry_no_numbers():
    for r in reference_table():
        if r.status == "unavailable":
            assert r.computed is None and "unavailable" in r.note


def test_tolerance_rule():
    assert tolerance_for("4.596") == 5e-4
    assert tolerance_for("3.558592") == pytest.approx(5e-6)
    assert tolerance_for("0.6653671") == pytest.approx(5e-7)


def test_designs():
    mono = highway_monotone_design()
    assert mono.n == 16
    assert mono.t[-1] == pytest.approx(3.75) and mono.s[-1] == pytest.approx(3.0)
    assert highway_scattered_design().n == 16


def test_vertex_grid_closed_form():
    # the 2x2 grid is a product of two 2-point lines, each 2 / (1 + e^{-x})
    assert vertex_grid_information() == pytest.approx((2 / (1 + math.exp(-1))) ** 2, rel=1e-14)
    assert vertex_grid_information() != pytest.approx(published_grid_formula(1.0), rel=1e-3)


def test_dense_oracle_on_monotone_highway_design():
    p = CovarianceParams(1.0, 10.0)
    assert compute_values()["highway_table.mtheta.1_10"] == pytest.approx(
        trend_information_oracle(highway_monotone_design(), p), rel=1e-10
    )


def test_grid_rows_agree_both_ways():
    v = compute_values()
    for key in ("highway_grid.1_1", "highway_grid.1_10", "highway_grid.10_1"):
        kron, dense = v[key]
        assert kron == pytest.approx(dense, rel=1e-9)
