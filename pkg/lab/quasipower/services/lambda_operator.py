"""
Lambda Operator Service
Evaluates the non-linear partition operator

    Lambda_K(h) = sum_{alpha in Pi_K} mu_alpha prod_{J in alpha} h o psi_{J,K}

pointwise on arbitrary complex functions and on tensor grids of values.
"""
from functools import lru_cache
from itertools import combinations
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from quasipower.config import DEFAULT_LAMBDA_FLOOR
from quasipower.errors import HyperplaneProximityError
from quasipower.schemas import LambdaTerm
from quasipower.services.partition_lattice import enumerate_partitions, mobius_coefficient


class EvaluableFunction:
    """
    A function h: C^K -> C with a declared arity K.

    Vectors passed to h are tuples aligned with the sorted arity.
    """

    def __init__(self, arity: Iterable[int], func: Callable[[Tuple[Any, ...]], Any]):
        self.arity: Tuple[int, ...] = tuple(sorted(arity))
        if not self.arity:
            raise ValueError("arity must be nonempty")
        self.func = func

    def __call__(self, t: Sequence[Any]) -> Any:
        return self.func(tuple(t))

    def __repr__(self) -> str:
        return f"EvaluableFunction(arity={self.arity})"


def _positions(J: Iterable[int], K: Tuple[int, ...]) -> Tuple[int, ...]:
    index = {k: i for i, k in enumerate(K)}
    positions = []
    for j in J:
        if j not in index:
            raise ValueError(f"index {j} of J is not in K = {set(K)}")
        positions.append(index[j])
    return tuple(sorted(positions))


def _default_ground(t: Sequence[Any], K: Optional[Iterable[int]]) -> Tuple[int, ...]:
    ground = tuple(range(1, len(t) + 1)) if K is None else tuple(sorted(K))
    if len(ground) != len(t):
        raise ValueError(f"vector of length {len(t)} does not match index set {ground}")
    return ground


def project(t: Sequence[Any], J: Iterable[int], K: Optional[Iterable[int]] = None) -> Tuple[Any, ...]:
    """
    psi_{J,K}: keeps coordinates in J and sets the others to 0.

    Args:
        t: Vector over K (aligned with sorted K).
        J: Subset of K.
        K: Index set; defaults to {1..len(t)}.

    Raises:
        ValueError: If J is not a subset of K.
    """
    ground = _default_ground(t, K)
    keep = set(_positions(J, ground))
    return tuple(value if i in keep else 0 for i, value in enumerate(t))


def embed(t_J: Sequence[Any], J: Iterable[int], K: Iterable[int]) -> Tuple[Any, ...]:
    """
    chi_{J,K}: injects a vector over J into C^K, filling K \\ J with 0.

    Raises:
        ValueError: If J is not a subset of K or t_J does not match J.
    """
    J = tuple(sorted(J))
    ground = tuple(sorted(K))
    if len(t_J) != len(J):
        raise ValueError(f"vector of length {len(t_J)} does not match J = {J}")
    positions = _positions(J, ground)
    result: List[Any] = [0] * len(ground)
    for position, value in zip(positions, t_J):
        result[position] = value
    return tuple(result)


def restrict(h: EvaluableFunction, K: Iterable[int]) -> EvaluableFunction:
    """h o chi_{K,L}: the restriction of h to the coordinates K (others fixed at 0)."""
    K = tuple(sorted(K))
    L = h.arity
    _positions(K, L)
    return EvaluableFunction(K, lambda t_K: h(embed(t_K, K, L)))


@lru_cache(maxsize=64)
def _expansion(ground: Tuple[int, ...]) -> Tuple[Tuple[int, Tuple[Tuple[int, ...], ...]], ...]:
    """(mu_alpha, block positions) for every partition of ground; cached per index set."""
    expansion = []
    for alpha in enumerate_partitions(ground):
        blocks = tuple(_positions(block, ground) for block in alpha.blocks)
        expansion.append((mobius_coefficient(alpha), blocks))
    return tuple(expansion)


def lambda_terms(K: Iterable[int]) -> List[LambdaTerm]:
    """The expansion of Lambda_K as explicit terms."""
    return [
        LambdaTerm(partition=alpha, coefficient=mobius_coefficient(alpha), factors=alpha.blocks)
        for alpha in enumerate_partitions(K)
    ]


def lambda_eval(h: EvaluableFunction, t: Sequence[Any]) -> Any:
    """
    Evaluates Lambda_K(h)(t) exactly as the sum over all partitions of K.

    h is evaluated once per distinct block J; the arithmetic type of h's
    values is preserved (exact rationals stay exact).

    Args:
        h: Function with arity K.
        t: Point, aligned with sorted K.

    Returns:
        Lambda_K(h)(t).
    """
    ground = h.arity
    if len(t) != len(ground):
        raise ValueError(f"point of length {len(t)} does not match arity {ground}")
    t = tuple(t)
    values: Dict[Tuple[int, ...], Any] = {}
    total: Any = 0
    for coefficient, blocks in _expansion(ground):
        product: Any = coefficient
        for block in blocks:
            if block not in values:
                keep = set(block)
                values[block] = h(tuple(v if i in keep else 0 for i, v in enumerate(t)))
            product = product * values[block]
        total = total + product
    return total


def lambda_quotient(h: EvaluableFunction, t: Sequence[Any], floor: float = DEFAULT_LAMBDA_FLOOR) -> Any:
    """
    Lambda_K(h)(t) / prod_k t_k, defined only off the coordinate hyperplanes.

    Raises:
        HyperplaneProximityError: If some |t_k| < floor.
    """
    denominator: Any = 1
    for k, value in zip(h.arity, t):
        if abs(value) < floor:
            raise HyperplaneProximityError(
                f"|t_{k}| = {abs(value):.3e} is below the hyperplane floor {floor:.1e}"
            )
        denominator = denominator * value
    return lambda_eval(h, t) / denominator


def nonempty_subsets(K: Iterable[int]) -> List[Tuple[int, ...]]:
    """All nonempty subsets of K, by size then lexicographically."""
    ground = tuple(sorted(K))
    return [subset for size in range(1, len(ground) + 1) for subset in combinations(ground, size)]


def lambda_eval_grid(values_by_subset: Mapping[Tuple[int, ...], np.ndarray], K: Iterable[int]) -> np.ndarray:
    """
    Evaluates Lambda_K on a tensor grid.

    Args:
        values_by_subset: For every nonempty J subset of K, the array of
            h o psi_{J,K} over the grid; axes outside J may have length 1 and
            are broadcast.
        K: Index set.

    Returns:
        Array of Lambda_K(h) over the full grid.
    """
    ground = tuple(sorted(K))
    total: Any = 0
    for coefficient, blocks in _expansion(ground):
        product: Any = coefficient
        for block in blocks:
            subset = tuple(ground[i] for i in block)
            product = product * values_by_subset[subset]
        total = total + product
    return np.asarray(total)
