"""
Quasi-Power Lab Service
Quasi-power families of exact distributions: standardization, Kolmogorov
convergence studies, moment-polynomial checks and the degenerate
counterexample with a point-mass limit.
"""
import math
import sys
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from quasipower.config import DEFAULT_SERIES_ORDER, DEFAULT_TOL, MAX_GAUSSIAN_CDF_DIM
from quasipower.errors import CapacityError, DegenerateCovarianceError
from quasipower.schemas import (
    ConvergenceRow,
    DegenerateRow,
    DissectionSpec,
    GaussianSpec,
    Grammar,
    LatticeDistribution,
    MomentRow,
    QuasiPowerFamily,
)
from quasipower.services.dissection_model import dissection_distribution
from quasipower.services.distribution_core import (
    covariance_matrix,
    from_weights,
    kolmogorov_distance,
    marginal,
    marginal_gaussian,
    mean_vector,
    moments,
    point_mass,
    standardize,
)
from quasipower.services.grammar_counting import CountTable, grammar_distribution
from quasipower.services.series_algebra import MultiSeries, mgf_series, moment_polynomials, series_log


# --- Building blocks ---

def convolve(a: LatticeDistribution, b: LatticeDistribution) -> LatticeDistribution:
    """
    Distribution of the sum of independent draws from a and b (exact weights).

    Raises:
        ValueError: If the dimensions differ.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if len(a.points) > len(b.points):
        a, b = b, a
    atoms: Dict[Tuple[Any, ...], int] = {}
    outer = list(zip(b.points, b.weights))
    for x, weight_x in zip(a.points, a.weights):
        for y, weight_y in outer:
            key = tuple(i + j for i, j in zip(x, y))
            atoms[key] = atoms.get(key, 0) + weight_x * weight_y
    return from_weights(atoms)


def coin_distribution(low: Any = -1, high: Any = 1) -> LatticeDistribution:
    """Fair two-point distribution on {low, high}."""
    return from_weights({(low,): 1, (high,): 1})


def binomial_distribution(n: int, p: Fraction = Fraction(1, 2)) -> LatticeDistribution:
    """Binomial(n, p) on {0..n} with integer weights C(n,k) a^k (b-a)^(n-k) for p = a/b."""
    p = Fraction(p)
    if n < 0 or not 0 < p < 1:
        raise ValueError(f"binomial needs n >= 0 and 0 < p < 1, got n={n}, p={p}")
    a, b = p.numerator, p.denominator
    return from_weights({(k,): math.comb(n, k) * a ** k * (b - a) ** (n - k) for k in range(n + 1)})


def product_distribution(a: LatticeDistribution, b: LatticeDistribution) -> LatticeDistribution:
    """Independent coupling of a and b, coordinates of a first."""
    atoms = {
        x + y: weight_x * weight_y
        for x, weight_x in zip(a.points, a.weights)
        for y, weight_y in zip(b.points, b.weights)
    }
    return from_weights(atoms)


# --- Families ---

class _PowerCache:
    """n-fold convolution powers by binary powering, sharing the 2^k powers."""

    def __init__(self, base: LatticeDistribution):
        self.base = base
        self.doublings: List[LatticeDistribution] = [base]
        self.results: Dict[int, LatticeDistribution] = {}

    def __call__(self, n: int) -> LatticeDistribution:
        if n < 0:
            raise ValueError(f"number of summands must be nonnegative, got {n}")
        if n in self.results:
            return self.results[n]
        result = point_mass((0,) * self.base.dim)
        k, remaining = 0, n
        while remaining:
            while len(self.doublings) <= k:
                last = self.doublings[-1]
                self.doublings.append(convolve(last, last))
            if remaining & 1:
                result = convolve(result, self.doublings[k])
            remaining >>= 1
            k += 1
        self.results[n] = result
        return result


def iid_sum_family(base: LatticeDistribution, order: int = DEFAULT_SERIES_ORDER) -> QuasiPowerFamily:
    """
    Family Omega_n = sum of n independent copies of base.

    Exact quasi-power representation: M_n(s) = exp(n u(s)) with u = log of
    the base mgf, v = 0, phi_n = n, kappa_n = infinity.

    Raises:
        CapacityError: If base has dimension > 3.
    """
    if base.dim > MAX_GAUSSIAN_CDF_DIM:
        raise CapacityError(f"iid family dimension {base.dim} exceeds the limit {MAX_GAUSSIAN_CDF_DIM}")
    u = series_log(mgf_series(base.points, base.weights, order))
    v = MultiSeries(base.dim, u.bound, None, u.ring)
    return QuasiPowerFamily(
        name="iid",
        dim=base.dim,
        generator=_PowerCache(base),
        phi=lambda n: n,
        u=u,
        v=v,
        grad_u0=mean_vector(base),
        hess_u0=covariance_matrix(base),
        metadata={"base": base.to_payload(), "series_order": order},
    )


def product_family(first: LatticeDistribution, second: LatticeDistribution,
                   order: int = DEFAULT_SERIES_ORDER) -> QuasiPowerFamily:
    """
    iid family of the independent coupling first x second.

    The n-fold sum of a product base is the product of the two n-fold sums,
    so the generator convolves each factor separately.
    """
    family = iid_sum_family(product_distribution(first, second), order=order)
    first_powers, second_powers = _PowerCache(first), _PowerCache(second)
    return family.model_copy(update={
        "name": "iid-product",
        "generator": lambda n: product_distribution(first_powers(n), second_powers(n)),
    })


def grammar_family(grammar: Grammar) -> QuasiPowerFamily:
    """Tracked-symbol counts of words of length n; exact-moments mode only."""
    table = CountTable(grammar)
    return QuasiPowerFamily(
        name="grammar",
        dim=len(grammar.tracked),
        generator=lambda n: grammar_distribution(grammar, n, table=table),
        phi=lambda n: n,
        metadata={"tracked": list(grammar.tracked), "probability_model": "uniform over words of length n"},
    )


def dissection_family(spec: DissectionSpec) -> QuasiPowerFamily:
    """Class counts of a uniform dissection of the n-gon; exact-moments mode only."""
    return QuasiPowerFamily(
        name="dissection",
        dim=spec.num_classes,
        generator=lambda n: dissection_distribution(spec, n),
        phi=lambda n: n,
        metadata={"classes": [list(c) for c in spec.classes], "probability_model": "uniform over dissections"},
    )


# --- Standardization ---

def _sqrt_scale(phi: Any) -> Any:
    """Exact integer square root when phi is a perfect square, float otherwise."""
    if isinstance(phi, int) and phi >= 0 and math.isqrt(phi) ** 2 == phi:
        return math.isqrt(phi)
    return math.sqrt(phi)


def standardized_distribution(fam: QuasiPowerFamily, n: int,
                              mode: str = "exact") -> Tuple[LatticeDistribution, GaussianSpec]:
    """
    (Omega_n - center) / sqrt(phi_n) together with its normal reference.

    analytic: center = grad u(0) phi_n, reference covariance H_u(0).
    exact: center = exact mean, reference covariance = exact covariance / phi_n.

    Raises:
        ValueError: If mode is unknown or analytic data is missing.
        DegenerateCovarianceError: If H_u(0) is singular in analytic mode.
    """
    distribution = fam.generator(n)
    phi = fam.phi(n)
    scale = _sqrt_scale(phi)
    m = fam.dim
    if mode == "analytic":
        if not fam.has_analytic_data:
            raise ValueError(f"family '{fam.name}' has no analytic data; use exact mode")
        center = tuple(g * phi for g in fam.grad_u0)
        cov = tuple(tuple(float(x) for x in row) for row in fam.hess_u0)
        reference = GaussianSpec(dim=m, mean=(0.0,) * m, cov=cov)
        if not reference.non_degenerate:
            raise DegenerateCovarianceError(
                "H_u(0) is singular; the limit has no uniform rate (see the degenerate demo)"
            )
    elif mode == "exact":
        center = mean_vector(distribution)
        cov = tuple(tuple(float(x / phi) for x in row) for row in covariance_matrix(distribution))
        reference = GaussianSpec(dim=m, mean=(0.0,) * m, cov=cov)
    else:
        raise ValueError(f"unknown standardization mode '{mode}'")
    return standardize(distribution, center, scale), reference


def independent_axes(g: GaussianSpec) -> Tuple[int, ...]:
    """Greedy maximal set of 1-based axes whose covariance block is non-singular."""
    cov = g.cov_matrix
    kept: List[int] = []
    for axis in range(g.dim):
        trial = kept + [axis]
        if np.linalg.matrix_rank(cov[np.ix_(trial, trial)]) == len(trial):
            kept.append(axis)
    return tuple(axis + 1 for axis in kept)


def reduce_dependent_axes(distribution: LatticeDistribution, reference: GaussianSpec,
            ) -> Tuple[LatticeDistribution, GaussianSpec, Tuple[int, ...]]:
    """Drops coordinates that are affine functions of the others."""
    if reference.non_degenerate:
        return distribution, reference, tuple(range(1, reference.dim + 1))
    axes = independent_axes(reference)
    if not axes:
        raise DegenerateCovarianceError("every coordinate is constant; nothing to compare")
    return marginal(distribution, axes), marginal_gaussian(reference, axes), axes


# --- Studies ---

def convergence_study(fam: QuasiPowerFamily, n_list: Sequence[int], mode: str = "exact",
                      tol: float = DEFAULT_TOL) -> List[ConvergenceRow]:
    """
    Kolmogorov distance of each standardized Omega_n to its normal reference.

    In exact mode a singular exact covariance (coordinates tied by an affine
    relation) is reduced to a maximal independent set of coordinates; the
    kept axes are reported per row.
    """
    rows = []
    for n in sorted(set(n_list)):
        distribution, reference = standardized_distribution(fam, n, mode)
        distribution, reference, axes = reduce_dependent_axes(distribution, reference)
        distance = min(1.0, max(0.0, float(kolmogorov_distance(distribution, reference, tol))))
        phi = float(fam.phi(n))
        rows.append(ConvergenceRow(
            n=n, phi_n=phi, distance=distance, normalized=distance * math.sqrt(phi), mode=mode, axes=axes,
        ))
        print(f"[Study] {fam.name} n={n} d_n={distance:.6f} d_n*sqrt(phi)={distance * math.sqrt(phi):.4f}",
              file=sys.stderr)
    return rows


def moment_check(fam: QuasiPowerFamily, k: Sequence[int], n_list: Sequence[int]) -> List[MomentRow]:
    """
    Compares E prod Omega_{n,l}^k_l / prod k_l! with the moment polynomial p_k(phi_n).

    Raises:
        ValueError: If the family has no analytic data.
        InsufficientOrderError: If u or v is truncated below k.
    """
    if not fam.has_analytic_data or fam.v is None:
        raise ValueError(f"family '{fam.name}' has no analytic data")
    k = tuple(k)
    if len(k) != fam.dim:
        raise ValueError(f"k has length {len(k)}, expected dimension {fam.dim}")
    polynomial = moment_polynomials(fam.u, fam.v, k)
    factorials = math.prod(math.factorial(e) for e in k)
    rows = []
    for n in sorted(set(n_list)):
        exact = moments(fam.generator(n), k) / factorials
        predicted = polynomial(Fraction(fam.phi(n)))
        rows.append(MomentRow(n=n, k=k, exact=exact, predicted=predicted, abs_error=abs(exact - predicted)))
    return rows


def degenerate_distribution(n: int) -> LatticeDistribution:
    """Omega_n / sqrt(n) for the constant +-1 sequence."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    root = math.isqrt(n)
    step = Fraction(1, root) if root * root == n else 1.0 / math.sqrt(n)
    return from_weights({(-step,): 1, (step,): 1})


def degenerate_demo(n_list: Sequence[int], tol: float = DEFAULT_TOL,
                    gaussian_floor: bool = True) -> List[DegenerateRow]:
    """
    Sup distance of Omega_n / sqrt(n) (values +-1/sqrt(n)) to its point-mass
    limit at 0: exactly 1/2 for every n, so there is no uniform convergence.
    Optionally also reports the distance to N(0, 1/n).
    """
    limit = point_mass((0,))
    rows = []
    for n in sorted(set(n_list)):
        distribution = degenerate_distribution(n)
        distance = kolmogorov_distance(distribution, limit)
        floor_distance: Optional[float] = None
        if gaussian_floor:
            floor = GaussianSpec(dim=1, mean=(0.0,), cov=((1.0 / n,),))
            floor_distance = float(kolmogorov_distance(distribution, floor, tol))
        rows.append(DegenerateRow(n=n, distance=distance, gaussian_floor_distance=floor_distance))
    return rows
