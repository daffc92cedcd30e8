"""
Test Dissection Model
The generating-function counts are checked against brute-force enumeration
of non-crossing diagonal sets.
"""
from math import comb

import pytest

from quasipower.errors import CapacityError, EmptySupportError, InsufficientOrderError
from quasipower.schemas import DissectionSpec
from quasipower.services.dissection_model import (
    dissection_counts,
    dissection_distribution,
    dissection_fixed_point,
    enumerate_dissections,
    parse_dissection_spec,
    solve_dissection_series,
)


def test_triangulation_series_coefficients(triangles):
    series = solve_dissection_series(triangles, 4)
    # f = z + x z^2 + 2 x^2 z^3 + 5 x^3 z^4 + ...
    assert series.coefficient((1, 0)) == 1
    assert series.coefficient((2, 1)) == 1
    assert series.coefficient((3, 2)) == 2
    assert series.coefficient((4, 3)) == 5


def test_fixed_point_needs_at_most_N_iterations(triangles_and_quadrilaterals):
    _, iterations = dissection_fixed_point(triangles_and_quadrilaterals, 9)
    assert 1 <= iterations <= 9


def test_edge_is_the_empty_dissection(triangles):
    assert dissection_counts(triangles, 2) == {(0,): 1}


@pytest.mark.parametrize("n", range(3, 16))
def test_triangulations_are_catalan(triangles, n):
    assert dissection_counts(triangles, n) == {(n - 2,): comb(2 * (n - 2), n - 2) // (n - 1)}


def test_pentagon_table(triangles_and_quadrilaterals):
    assert dissection_counts(triangles_and_quadrilaterals, 5) == {(1, 1): 5, (3, 0): 5}


def test_hexagon_table(triangles_and_quadrilaterals):
    assert dissection_counts(triangles_and_quadrilaterals, 6) == {(0, 2): 3, (2, 1): 21, (4, 0): 14}


@pytest.mark.parametrize("classes", [((3,), (4,)), ((3,), (4, 5)), ((4,), (3, 6))])
@pytest.mark.parametrize("n", range(3, 9))
def test_counts_match_brute_force(classes, n):
    spec = DissectionSpec(classes=classes)
    assert dissection_counts(spec, n) == enumerate_dissections(spec, n)


def test_reused_series_must_reach_order(triangles):
    series = solve_dissection_series(triangles, 4)
    assert dissection_counts(triangles, 5, series=series) == {(3,): 5}
    with pytest.raises(InsufficientOrderError):
        dissection_counts(triangles, 7, series=series)


def test_polygon_size_below_two_rejected(triangles):
    with pytest.raises(ValueError):
        dissection_counts(triangles, 1)


def test_no_dissection_raises():
    with pytest.raises(EmptySupportError):
        dissection_distribution(DissectionSpec(classes=((4,),)), 5)


def test_distribution_weights_are_counts(triangles_and_quadrilaterals):
    d = dissection_distribution(triangles_and_quadrilaterals, 5)
    assert d.points == ((1, 1), (3, 0))
    assert d.weights == (5, 5)


def test_parse_classes():
    spec = parse_dissection_spec('{"classes": [[3], [4, 5]]}')
    assert spec.classes == ((3,), (4, 5))


@pytest.mark.parametrize("n, total", [(3, 1), (4, 3), (5, 11), (6, 45), (7, 197), (8, 903)])
def test_enumeration_counts_all_dissections(n, total):
    # every face size from 3 to n allowed: little Schroeder numbers
    spec = DissectionSpec(classes=(tuple(range(3, n + 1)),))
    assert sum(enumerate_dissections(spec, n).values()) == total


def test_enumeration_hexagon_table(triangles_and_quadrilaterals):
    assert enumerate_dissections(triangles_and_quadrilaterals, 6) == {(0, 2): 3, (2, 1): 21, (4, 0): 14}


def test_enumeration_size_limits(triangles):
    with pytest.raises(ValueError):
        enumerate_dissections(triangles, 2)
    with pytest.raises(CapacityError):
        enumerate_dissections(triangles, 11)
