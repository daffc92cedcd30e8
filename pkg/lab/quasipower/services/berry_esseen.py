"""
Berry-Esseen Service
Right-hand side of the m-dimensional Berry-Esseen inequality built on the
Lambda operator, its fully recursive variant, and inequality verification
against exactly computed Kolmogorov distances.
"""
import math
import sys
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from quasipower.config import DEFAULT_BOUND_REL_TOL, DEFAULT_MAX_LEVEL, DEFAULT_TOL, MAX_QUADRATURE_DIM
from quasipower.errors import CapacityError, DegenerateCovarianceError
from quasipower.schemas import BoundReport, GaussianSpec, InequalityCheck, LatticeDistribution, subset_key
from quasipower.services.distribution_core import (
    char_fn_grid,
    gaussian_char_fn_grid,
    kolmogorov_distance,
    marginal,
    marginal_gaussian,
)
from quasipower.services.lambda_operator import lambda_eval_grid, nonempty_subsets
from quasipower.services.partition_lattice import fubini, smoothing_constants
from quasipower.services.quadrature import refine_until


def gaussian_partial_sup(g: GaussianSpec, j: int) -> float:
    """
    Upper bound for A_j = sup_y dF_Y/dy_j: the peak of the j-th marginal density.

    Args:
        g: Non-degenerate Gaussian.
        j: 1-based axis.

    Raises:
        DegenerateCovarianceError: If g is singular.
    """
    if not 1 <= j <= g.dim:
        raise ValueError(f"axis {j} outside 1..{g.dim}")
    if not g.non_degenerate:
        raise DegenerateCovarianceError("partial-derivative bound needs a non-degenerate covariance")
    return 1.0 / math.sqrt(2.0 * math.pi * g.cov[j - 1][j - 1])


def _validate(X: LatticeDistribution, g: GaussianSpec, T: float) -> None:
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if X.dim != g.dim:
        raise ValueError(f"dimension mismatch: X has {X.dim}, Gaussian has {g.dim}")
    if X.dim > MAX_QUADRATURE_DIM:
        raise CapacityError(f"Berry-Esseen bound dimension {X.dim} exceeds the limit {MAX_QUADRATURE_DIM}")
    if not g.non_degenerate:
        raise DegenerateCovarianceError("Berry-Esseen bound needs a non-degenerate Gaussian")


def _lambda_difference_integral(X: LatticeDistribution, g: GaussianSpec, K: Tuple[int, ...], T: float,
                                rel_tol: float, max_level: int, abs_tol: float = 0.0):
    """
    Integral of |Lambda_K(phi_X o chi) - Lambda_K(phi_Y o chi)| / |prod t_k| over [-T, T]^K.

    phi_X o chi_{K,L} o psi_{J,K} is the characteristic function of the
    marginal X_J, so each factor comes from one marginal per subset J of K.
    """
    subsets = nonempty_subsets(K)
    position = {k: i for i, k in enumerate(K)}
    lattice_marginals = {J: marginal(X, J) for J in subsets}
    gaussian_marginals = {J: marginal_gaussian(g, J) for J in subsets}

    def integrand(nodes: List[np.ndarray]) -> np.ndarray:
        x_values: Dict[Tuple[int, ...], np.ndarray] = {}
        y_values: Dict[Tuple[int, ...], np.ndarray] = {}
        for J in subsets:
            axes = [nodes[position[j]] for j in J]
            shape = [1] * len(K)
            for j in J:
                shape[position[j]] = len(nodes[position[j]])
            x_values[J] = char_fn_grid(lattice_marginals[J], axes).reshape(shape)
            y_values[J] = gaussian_char_fn_grid(gaussian_marginals[J], axes).reshape(shape)
        difference = lambda_eval_grid(x_values, K) - lambda_eval_grid(y_values, K)
        denominator = np.ones([len(axis) for axis in nodes])
        for i, axis in enumerate(nodes):
            shape = [1] * len(K)
            shape[i] = len(axis)
            denominator = denominator * np.abs(axis).reshape(shape)
        return np.abs(difference) / denominator

    box = [(-T, T)] * len(K)
    return refine_until(integrand, box, rel_tol=rel_tol, max_level=max_level, abs_tol=abs_tol)


def _smoothing(g: GaussianSpec, axes: Iterable[int], T: float, m: int) -> float:
    constants = smoothing_constants(m)
    partial_sum = sum(gaussian_partial_sup(g, j) for j in axes)
    # (2 sum A_j / T) first, so halving T doubles the term exactly
    return ((2.0 * partial_sum) / T) * (constants.c1 + constants.c2)


def be_rhs(X: LatticeDistribution, g: GaussianSpec, T: float, tol: float = DEFAULT_TOL,
           rel_tol: float = DEFAULT_BOUND_REL_TOL, max_level: int = DEFAULT_MAX_LEVEL,
           compute_lhs: bool = True) -> BoundReport:
    """
    Evaluates the three summands of the Berry-Esseen right-hand side.

    Args:
        X: Discrete distribution (m <= 3).
        g: Non-degenerate normal reference.
        T: Smoothing parameter, T > 0.
        tol: Tolerance for Gaussian CDF evaluations in the marginal sups.
        rel_tol: Relative tolerance of the integral term's quadrature.
        compute_lhs: Also compute sup |F_X - F_Y|.

    Returns:
        BoundReport with integral, marginal and smoothing terms itemized.
        A non-converged quadrature is flagged, not raised.

    Raises:
        ValueError: If T <= 0 or dimensions differ.
        CapacityError: If m > 3.
    """
    _validate(X, g, T)
    m = X.dim
    L = tuple(range(1, m + 1))
    print(f"[BerryEsseen] m={m} T={T:g}: integrating Lambda difference", file=sys.stderr)
    scale = 2.0 / (2.0 * math.pi) ** m
    smoothing_term = _smoothing(g, L, T, m)
    # absolute floor for integrals that vanish identically (independent coordinates)
    quadrature = _lambda_difference_integral(X, g, L, T, rel_tol, max_level,
                                             abs_tol=rel_tol * smoothing_term / scale)
    integral_term = scale * float(np.real(quadrature.value))

    marginal_sups: Dict[str, float] = {}
    marginal_term = 0.0
    for J in nonempty_subsets(L):
        if len(J) == m:
            continue
        sup = float(kolmogorov_distance(marginal(X, J), marginal_gaussian(g, J), tol))
        marginal_sups[subset_key(J)] = sup
        marginal_term += 2.0 * fubini(m - len(J)) * sup

    lhs = float(kolmogorov_distance(X, g, tol)) if compute_lhs else None
    return BoundReport(
        variant="theorem",
        dimension=m,
        T=T,
        integral_term=integral_term,
        marginal_term=marginal_term,
        smoothing_term=smoothing_term,
        rhs_total=integral_term + marginal_term + smoothing_term,
        lhs_sup=lhs,
        marginal_sups=marginal_sups,
        quadrature_error=scale * quadrature.error_estimate,
        quadrature_converged=quadrature.converged,
    )


def recursive_multipliers(m: int) -> Dict[Tuple[int, ...], int]:
    """
    Constants c_K of the fully expanded bound: c_L = 1 and
    c_J = sum over K strictly containing J of c_K * 2 * F_{|K| - |J|},
    F the Fubini numbers.
    """
    L = tuple(range(1, m + 1))
    multipliers: Dict[Tuple[int, ...], int] = {L: 1}
    subsets = sorted(nonempty_subsets(L), key=len, reverse=True)
    for J in subsets:
        if J == L:
            continue
        multipliers[J] = sum(
            c_K * 2 * fubini(len(K) - len(J))
            for K, c_K in multipliers.items()
            if len(K) > len(J) and set(J) < set(K)
        )
    return multipliers


def be_rhs_recursive(X: LatticeDistribution, g: GaussianSpec, T: float, tol: float = DEFAULT_TOL,
                     rel_tol: float = DEFAULT_BOUND_REL_TOL, max_level: int = DEFAULT_MAX_LEVEL,
                     compute_lhs: bool = True) -> BoundReport:
    """
    Fully expanded bound: the inequality substituted into its own marginal
    terms down to single coordinates. Each subset K contributes
    c_K * (integral over [-T, T]^K + smoothing with the |K|-dimensional constants).

    The multipliers used are returned in the report.
    """
    _validate(X, g, T)
    m = X.dim
    multipliers = recursive_multipliers(m)
    integral_term = smoothing_term = error = 0.0
    converged = True
    for K in nonempty_subsets(range(1, m + 1)):
        print(f"[BerryEsseen] recursive term K={subset_key(K)} (c_K={multipliers[K]})", file=sys.stderr)
        scale = 2.0 / (2.0 * math.pi) ** len(K)
        smoothing = _smoothing(g, K, T, len(K))
        quadrature = _lambda_difference_integral(X, g, K, T, rel_tol, max_level,
                                                 abs_tol=rel_tol * smoothing / scale)
        integral_term += multipliers[K] * scale * float(np.real(quadrature.value))
        error += multipliers[K] * scale * quadrature.error_estimate
        converged = converged and quadrature.converged
        smoothing_term += multipliers[K] * smoothing
    lhs = float(kolmogorov_distance(X, g, tol)) if compute_lhs else None
    return BoundReport(
        variant="recursive",
        dimension=m,
        T=T,
        integral_term=integral_term,
        marginal_term=0.0,
        smoothing_term=smoothing_term,
        rhs_total=integral_term + smoothing_term,
        lhs_sup=lhs,
        multipliers={subset_key(K): float(c) for K, c in multipliers.items()},
        quadrature_error=error,
        quadrature_converged=converged,
    )


def verify_inequality(X: LatticeDistribution, g: GaussianSpec, T_list: Sequence[float],
                      tol: float = DEFAULT_TOL, recursive: bool = False,
                      rel_tol: float = DEFAULT_BOUND_REL_TOL) -> List[InequalityCheck]:
    """
    Checks sup |F_X - F_Y| <= rhs(T) for every T in T_list.

    The slack allowed is tol (Gaussian CDF accuracy) plus the quadrature
    error estimate of the integral term.
    """
    if not T_list:
        raise ValueError("T_list must not be empty")
    lhs = float(kolmogorov_distance(X, g, tol))
    bound = be_rhs_recursive if recursive else be_rhs
    checks = []
    for T in T_list:
        report = bound(X, g, T, tol=tol, rel_tol=rel_tol, compute_lhs=False).model_copy(update={"lhs_sup": lhs})
        slack = tol + report.quadrature_error
        checks.append(InequalityCheck(
            T=T, lhs=lhs, rhs=report.rhs_total, slack=slack,
            holds=lhs <= report.rhs_total + slack, report=report,
        ))
        print(f"[BerryEsseen] T={T:g} lhs={lhs:.6f} rhs={report.rhs_total:.6f}", file=sys.stderr)
    return checks
