"""
Dissection Model Service
Solves f = z + sum_i x_i sum_{k in S_i} f^(k-1) for the generating function of
polygon dissections and extracts the exact joint counts a_n(r).

Sizes k > N + 1 cannot contribute at z-order N and are ignored by the solver,
so finite size classes are a truncation statement, not a restriction.
"""
import sys
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from quasipower.config import DISSECTION_ENUMERATION_CAP
from quasipower.errors import CapacityError, EmptySupportError, InsufficientOrderError
from quasipower.schemas import DissectionSpec, LatticeDistribution
from quasipower.services.distribution_core import from_weights
from quasipower.services.series_algebra import RATIONALS, MultiSeries


def parse_dissection_spec(text: str) -> DissectionSpec:
    """Parses '{"classes": [[3], [4]]}'."""
    return DissectionSpec.model_validate_json(text)


def _bound(spec: DissectionSpec, N: int) -> Tuple[int, ...]:
    # variables are (z, x_1, ..., x_t); at most N - 1 polygons fit at z-order N
    return (N,) + (N,) * spec.num_classes


@lru_cache(maxsize=16)
def dissection_fixed_point(spec: DissectionSpec, N: int) -> Tuple[MultiSeries, int]:
    """
    Fixed-point iteration f <- z + sum_i x_i sum_k f^(k-1) from f = 0.

    Every power has exponent k - 1 >= 2, so each iteration fixes at least one
    more z-order; the loop stops at the first no-op iteration.

    Returns:
        (series in (z, x_1..x_t) truncated at z-order N, iterations that changed f)
    """
    if N < 1:
        raise ValueError(f"z-order N must be at least 1, got {N}")
    variables = 1 + spec.num_classes
    bound = _bound(spec, N)
    z = MultiSeries.variable(variables, 0, bound, RATIONALS)
    markers = [MultiSeries.variable(variables, i + 1, bound, RATIONALS) for i in range(spec.num_classes)]
    usable = [tuple(k for k in sizes if k <= N + 1) for sizes in spec.classes]
    top = max((k for sizes in usable for k in sizes), default=2)

    f = MultiSeries(variables, bound, None, RATIONALS)
    iterations = 0
    while True:
        powers = {1: f}
        for exponent in range(2, top):
            powers[exponent] = powers[exponent - 1] * f
        update = z
        for marker, sizes in zip(markers, usable):
            if sizes:
                inner = MultiSeries(variables, bound, None, RATIONALS)
                for k in sizes:
                    inner = inner + powers[k - 1]
                update = update + marker * inner
        if update == f:
            return f, iterations
        iterations += 1
        f = update


def solve_dissection_series(spec: DissectionSpec, N: int) -> MultiSeries:
    print(f"[Dissection] solving classes {list(spec.classes)} to z-order {N}", file=sys.stderr)
    series, _ = dissection_fixed_point(spec, N)
    return series


def dissection_counts(spec: DissectionSpec, n: int, series: Optional[MultiSeries] = None) -> Dict[Tuple[int, ...], int]:
    """
    a_n(r) = [x^r z^(n-1)] f for every class-count vector r.

    Args:
        spec: Allowed size classes.
        n: Polygon size, n >= 2 (n = 2 is the undissected edge).
        series: Previously solved series; solved to order n - 1 when omitted.

    Raises:
        ValueError: If n < 2.
        InsufficientOrderError: If series is truncated below z-order n - 1.
    """
    if n < 2:
        raise ValueError(f"polygon size must be at least 2, got {n}")
    if series is None:
        series = solve_dissection_series(spec, n - 1)
    elif series.bound[0] < n - 1:
        raise InsufficientOrderError(
            f"series solved to z-order {series.bound[0]}; re-solve to at least {n - 1} for n = {n}"
        )
    counts: Dict[Tuple[int, ...], int] = {}
    for exponent, value in series.coefficients.items():
        if exponent[0] == n - 1:
            counts[tuple(exponent[1:])] = int(value)
    return dict(sorted(counts.items()))


def dissection_distribution(spec: DissectionSpec, n: int, series: Optional[MultiSeries] = None) -> LatticeDistribution:
    """
    Class-count vector of a uniformly random dissection of the n-gon.

    Raises:
        EmptySupportError: If the n-gon has no dissection under spec.
    """
    counts = dissection_counts(spec, n, series)
    if not counts:
        raise EmptySupportError(f"no dissection of the {n}-gon uses only sizes {list(spec.classes)}")
    return from_weights(counts)


def _crosses(d: Tuple[int, int], e: Tuple[int, int]) -> bool:
    (a, b), (c, f) = d, e
    return a < c < b < f or c < a < f < b


def _face_sizes(vertices: List[int], chords: List[Tuple[int, int]]) -> List[int]:
    for a, b in chords:
        if a in vertices and b in vertices:
            i, j = vertices.index(a), vertices.index(b)
            if j - i in (1, len(vertices) - 1):
                continue
            rest = [c for c in chords if c != (a, b)]
            return _face_sizes(vertices[i:j + 1], rest) + _face_sizes(vertices[:i + 1] + vertices[j:], rest)
    return [len(vertices)]


def enumerate_dissections(spec: DissectionSpec, n: int) -> Dict[Tuple[int, ...], int]:
    """
    Counts dissections of the n-gon directly, one non-crossing diagonal set at a time.

    Independent of the generating function; used to certify dissection_counts
    on small polygons.

    Raises:
        ValueError: If n < 3.
        CapacityError: If n exceeds DISSECTION_ENUMERATION_CAP.
    """
    if n < 3:
        raise ValueError(f"polygon size must be at least 3, got {n}")
    if n > DISSECTION_ENUMERATION_CAP:
        raise CapacityError(f"n = {n} exceeds the enumeration cap {DISSECTION_ENUMERATION_CAP}")
    diagonals = [(a, b) for a in range(n) for b in range(a + 2, n) if not (a == 0 and b == n - 1)]
    class_of = {k: i for i, sizes in enumerate(spec.classes) for k in sizes}
    counts: Dict[Tuple[int, ...], int] = {}

    def visit(index: int, chosen: List[Tuple[int, int]]) -> None:
        if index == len(diagonals):
            faces = _face_sizes(list(range(n)), chosen)
            if all(k in class_of for k in faces):
                r = [0] * spec.num_classes
                for k in faces:
                    r[class_of[k]] += 1
                counts[tuple(r)] = counts.get(tuple(r), 0) + 1
            return
        visit(index + 1, chosen)
        diagonal = diagonals[index]
        if not any(_crosses(diagonal, other) for other in chosen):
            visit(index + 1, chosen + [diagonal])

    visit(0, [])
    return dict(sorted(counts.items()))
