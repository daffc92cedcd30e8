"""
Distribution Core Service
Exact finite multivariate distributions, multivariate normal references and
the Kolmogorov sup-distance between them.
"""
import warnings
from bisect import bisect_right
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy.special import ndtr, ndtri

from quasipower.config import (
    DEFAULT_TOL,
    GAUSSIAN_CDF_CHUNK_NODES,
    GAUSSIAN_CDF_MAX_LEVEL,
    GAUSSIAN_CDF_MAX_NODES,
    GAUSSIAN_CDF_NODES_PER_PANEL,
    GAUSSIAN_CDF_PANELS,
    KOLMOGOROV_EPS_FACTOR,
    MAX_GAUSSIAN_CDF_DIM,
)
from quasipower.errors import CapacityError, DegenerateCovarianceError, QuadratureNonConvergence
from quasipower.schemas import GaussianSpec, LatticeDistribution

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


# --- Construction ---

def point_mass(point: Sequence[Any]) -> LatticeDistribution:
    """Dirac distribution at point."""
    point = tuple(point)
    return LatticeDistribution(dim=len(point), points=(point,), weights=(1,))


def from_weights(atoms: Mapping[Tuple[Any, ...], int]) -> LatticeDistribution:
    """
    Builds a distribution from a point -> weight map, dropping zero weights.

    Raises:
        ValueError: If no positive weight remains.
    """
    items = sorted((tuple(point), int(weight)) for point, weight in atoms.items() if weight)
    if not items:
        raise ValueError("distribution needs at least one atom with positive weight")
    return LatticeDistribution(
        dim=len(items[0][0]),
        points=tuple(point for point, _ in items),
        weights=tuple(weight for _, weight in items),
    )


def _check_dim(d: LatticeDistribution, vector: Sequence[Any], name: str) -> None:
    if len(vector) != d.dim:
        raise ValueError(f"{name} has length {len(vector)}, expected dimension {d.dim}")


# --- Queries on LatticeDistribution ---

def cdf(d: LatticeDistribution, z: Sequence[Any]) -> Fraction:
    """P(X <= z) componentwise, as an exact rational."""
    _check_dim(d, z, "z")
    mass = sum(
        weight for point, weight in zip(d.points, d.weights)
        if all(x <= bound for x, bound in zip(point, z))
    )
    return Fraction(mass, d.total)


def char_fn(d: LatticeDistribution, t: Sequence[float]) -> complex:
    """E exp(i <X, t>)."""
    _check_dim(d, t, "t")
    phases = d.float_points() @ np.asarray(t, dtype=float)
    return complex(np.dot(d.probabilities(), np.exp(1j * phases)))


def _axis_values(d: LatticeDistribution) -> List[List[Any]]:
    return [sorted({point[axis] for point in d.points}) for axis in range(d.dim)]


def _weight_tensor(d: LatticeDistribution, axis_values: List[List[Any]], exact: bool) -> np.ndarray:
    """Dense tensor of weights (exact ints) or probabilities (floats) over the per-axis grid."""
    index = [{value: i for i, value in enumerate(values)} for values in axis_values]
    shape = tuple(len(values) for values in axis_values)
    if exact:
        tensor = np.zeros(shape, dtype=object)
        for point, weight in zip(d.points, d.weights):
            tensor[tuple(index[axis][c] for axis, c in enumerate(point))] += weight
        return tensor
    tensor = np.zeros(shape, dtype=float)
    for point, probability in zip(d.points, d.probabilities()):
        tensor[tuple(index[axis][c] for axis, c in enumerate(point))] += probability
    return tensor


def char_fn_grid(d: LatticeDistribution, axes: Sequence[np.ndarray]) -> np.ndarray:
    """
    Characteristic function on the product grid axes[0] x ... x axes[m-1].

    Returns:
        Complex array of shape (len(axes[0]), ..., len(axes[m-1])).
    """
    if len(axes) != d.dim:
        raise ValueError(f"{len(axes)} grid axes given, expected dimension {d.dim}")
    axis_values = _axis_values(d)
    result = _weight_tensor(d, axis_values, exact=False).astype(complex)
    # contracting the leading support axis appends the matching t axis at the end
    for values, t in zip(axis_values, axes):
        phases = np.exp(1j * np.outer(np.asarray(t, dtype=float), np.array(values, dtype=float)))
        result = np.tensordot(result, phases, axes=([0], [1]))
    return result


def moments(d: LatticeDistribution, k: Sequence[int]) -> Fraction:
    """Exact cross-moment E prod_l X_l^k_l (float coordinates are taken at their exact binary value)."""
    _check_dim(d, k, "k")
    if any(e < 0 for e in k):
        raise ValueError("moment exponents must be nonnegative")
    total = Fraction(0)
    for point, weight in zip(d.points, d.weights):
        term = Fraction(weight)
        for x, e in zip(point, k):
            if e:
                term *= Fraction(x) ** e
        total += term
    return total / d.total


def mean_vector(d: LatticeDistribution) -> Tuple[Fraction, ...]:
    return tuple(
        moments(d, tuple(1 if i == j else 0 for i in range(d.dim))) for j in range(d.dim)
    )


def covariance_matrix(d: LatticeDistribution) -> Tuple[Tuple[Fraction, ...], ...]:
    """Exact covariance matrix."""
    mean = mean_vector(d)
    rows = []
    for i in range(d.dim):
        row = []
        for j in range(d.dim):
            k = [0] * d.dim
            k[i] += 1
            k[j] += 1
            row.append(moments(d, k) - mean[i] * mean[j])
        rows.append(tuple(row))
    return tuple(rows)


def standardize(d: LatticeDistribution, center: Sequence[Any], scale: Any) -> LatticeDistribution:
    """
    Maps every support point x to (x - center) / scale; weights unchanged.

    Raises:
        ValueError: If scale <= 0 or center has the wrong length.
    """
    _check_dim(d, center, "center")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    points = tuple(
        tuple((x - c) / scale for x, c in zip(point, center)) for point in d.points
    )
    return LatticeDistribution(dim=d.dim, points=points, weights=d.weights)


def _check_subset(J: Iterable[int], m: int) -> Tuple[int, ...]:
    J = tuple(sorted(set(J)))
    if not J:
        raise ValueError("marginal index set J must be nonempty")
    if J[0] < 1 or J[-1] > m:
        raise ValueError(f"marginal indices {J} fall outside 1..{m}")
    return J


def marginal(d: LatticeDistribution, J: Iterable[int]) -> LatticeDistribution:
    """Marginal on the 1-based coordinates J, aggregating collapsed points."""
    J = _check_subset(J, d.dim)
    atoms: Dict[Tuple[Any, ...], int] = {}
    for point, weight in zip(d.points, d.weights):
        key = tuple(point[j - 1] for j in J)
        atoms[key] = atoms.get(key, 0) + weight
    return from_weights(atoms)


# --- Gaussian references ---

def marginal_gaussian(g: GaussianSpec, J: Iterable[int]) -> GaussianSpec:
    J = _check_subset(J, g.dim)
    positions = [j - 1 for j in J]
    return GaussianSpec(
        dim=len(J),
        mean=tuple(g.mean[p] for p in positions),
        cov=tuple(tuple(g.cov[p][q] for q in positions) for p in positions),
    )


def moment_matched_gaussian(d: LatticeDistribution) -> GaussianSpec:
    """Normal distribution with the exact mean and covariance of d."""
    return GaussianSpec(
        dim=d.dim,
        mean=tuple(float(x) for x in mean_vector(d)),
        cov=tuple(tuple(float(x) for x in row) for row in covariance_matrix(d)),
    )


def gaussian_char_fn(g: GaussianSpec, t: Sequence[float]) -> complex:
    """exp(i <mu, t> - t' Sigma t / 2); defined for singular Sigma too."""
    t = np.asarray(t, dtype=float)
    if t.shape != (g.dim,):
        raise ValueError(f"t has length {len(t)}, expected dimension {g.dim}")
    mean = np.asarray(g.mean, dtype=float)
    return complex(np.exp(1j * mean @ t - 0.5 * t @ g.cov_matrix @ t))


def gaussian_char_fn_grid(g: GaussianSpec, axes: Sequence[np.ndarray]) -> np.ndarray:
    """gaussian_char_fn on a product grid, same layout as char_fn_grid."""
    if len(axes) != g.dim:
        raise ValueError(f"{len(axes)} grid axes given, expected dimension {g.dim}")
    m = g.dim
    shaped = []
    for axis, t in enumerate(axes):
        shape = [1] * m
        shape[axis] = len(t)
        shaped.append(np.asarray(t, dtype=float).reshape(shape))
    exponent: Any = 0.0
    for i in range(m):
        exponent = exponent + 1j * g.mean[i] * shaped[i]
        for j in range(m):
            if g.cov[i][j]:
                exponent = exponent - 0.5 * g.cov[i][j] * shaped[i] * shaped[j]
    full = tuple(len(t) for t in axes)
    return np.broadcast_to(np.exp(exponent), full).astype(complex)


def _check_gaussian_cdf(g: GaussianSpec) -> None:
    if g.dim > MAX_GAUSSIAN_CDF_DIM:
        raise CapacityError(f"Gaussian CDF dimension {g.dim} exceeds the limit {MAX_GAUSSIAN_CDF_DIM}")
    if not g.non_degenerate:
        raise DegenerateCovarianceError("Gaussian CDF needs a non-degenerate covariance")


@lru_cache(maxsize=16)
def _graded_rule(panels: int, nodes_per_panel: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1] with panel edges 0, 2^-(panels-1), ..., 1/2, 1."""
    reference_nodes, reference_weights = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.concatenate([[0.0], 0.5 ** np.arange(panels - 1, -1, -1, dtype=float)])
    nodes = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * reference_nodes for a, b in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (b - a) * reference_weights for a, b in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _shifted_bound(z: np.ndarray, mean: np.ndarray, chol: np.ndarray, ws: List[np.ndarray],
                   row: int, extra: int) -> np.ndarray:
    """z_row - mean_row - sum_j chol[row, j] w_j over the coordinates fixed so far."""
    value = z[:, row].reshape((z.shape[0],) + (1,) * extra) - mean[row]
    for j, w in enumerate(ws):
        value = value - chol[row, j] * w
    return value


def _cdf_chunk(z: np.ndarray, mean: np.ndarray, chol: np.ndarray, radius: float,
               rule_nodes: np.ndarray, rule_weights: np.ndarray) -> np.ndarray:
    """
    P(Y <= z) for each row of z, with Y = mean + chol W and W standard normal.

    The first m-1 coordinates of W are integrated by quadrature over
    [-radius, b_k(w)], the last one in closed form. Each interval is split
    where the next conditional bound changes sign and the rule is graded
    toward the split from both sides.
    """
    m = chol.shape[0]
    count = z.shape[0]
    accumulated = np.ones(count)
    ws: List[np.ndarray] = []
    for k in range(m):
        extra = accumulated.ndim - 1
        bound = _shifted_bound(z, mean, chol, ws, k, extra) / chol[k, k]
        if k == m - 1:
            return (accumulated * ndtr(bound)).reshape(count, -1).sum(axis=1)
        bound = np.clip(bound, -radius, radius)
        coupling = chol[k + 1, k]
        if coupling != 0.0:
            split = _shifted_bound(z, mean, chol, ws, k + 1, extra) / coupling
        else:
            split = np.zeros_like(bound)
        split = np.clip(split, -radius, bound)
        below = (split + radius)[..., None]
        above = (bound - split)[..., None]
        centre = split[..., None]
        nodes = np.concatenate([centre - below * rule_nodes, centre + above * rule_nodes], axis=-1)
        weights = np.concatenate([below * rule_weights, above * rule_weights], axis=-1)
        weights = weights * _INV_SQRT_2PI * np.exp(-0.5 * nodes * nodes)
        accumulated = accumulated[..., None] * weights
        ws = [w[..., None] for w in ws] + [nodes]
    raise AssertionError("unreachable")


def _refined_cdf(z: np.ndarray, mean: np.ndarray, chol: np.ndarray, radius: float, tol: float) -> np.ndarray:
    """Adds graded panels per level until successive estimates differ by at most tol / 10."""
    m = chol.shape[0]
    previous = None
    change = float("inf")
    for level in range(GAUSSIAN_CDF_MAX_LEVEL + 1):
        panels = GAUSSIAN_CDF_PANELS * (level + 1)
        per_point = (2 * panels * GAUSSIAN_CDF_NODES_PER_PANEL) ** (m - 1)
        if previous is not None and per_point > GAUSSIAN_CDF_MAX_NODES:
            break
        rule_nodes, rule_weights = _graded_rule(panels, GAUSSIAN_CDF_NODES_PER_PANEL)
        step = max(1, GAUSSIAN_CDF_CHUNK_NODES // per_point)
        current = np.concatenate([
            _cdf_chunk(z[start:start + step], mean, chol, radius, rule_nodes, rule_weights)
            for start in range(0, z.shape[0], step)
        ])
        if previous is not None:
            change = float(np.max(np.abs(current - previous)))
            if change <= tol / 10.0:
                return current
        previous = current
    warnings.warn(
        f"Gaussian CDF did not settle to tol={tol:g} (last change {change:.3e})",
        QuadratureNonConvergence,
        stacklevel=3,
    )
    return previous


def _gaussian_cdf_points(g: GaussianSpec, z: np.ndarray, tol: float) -> np.ndarray:
    _check_gaussian_cdf(g)
    z = np.atleast_2d(np.asarray(z, dtype=float))
    mean = np.asarray(g.mean, dtype=float)
    cov = g.cov_matrix
    sd = np.sqrt(np.diag(cov))
    if g.dim == 1 or np.count_nonzero(cov - np.diag(np.diag(cov))) == 0:
        return np.prod(ndtr((z - mean) / sd), axis=1)
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if z.shape[0] == 0:
        return np.zeros(0)
    # each truncated axis loses at most 2 * ndtr(-radius) of mass
    radius = float(-ndtri(tol / (20.0 * g.dim)))
    chol = np.linalg.cholesky(cov)
    return np.clip(_refined_cdf(z, mean, chol, radius, tol), 0.0, 1.0)


def gaussian_cdf(g: GaussianSpec, z: Sequence[float], tol: float = DEFAULT_TOL) -> float:
    """
    Phi_Sigma(z), within tol.

    m = 1 and diagonal covariances are closed form; otherwise nested
    Gauss-Legendre quadrature of the density in Cholesky coordinates, with
    tails truncated where the omitted mass is below tol / 10. Panels are
    added until two successive estimates agree to tol / 10; strong
    correlations need more levels, and running out of levels warns with
    QuadratureNonConvergence.

    Raises:
        CapacityError: If m > MAX_GAUSSIAN_CDF_DIM.
        DegenerateCovarianceError: If Sigma is singular.
    """
    if len(z) != g.dim:
        raise ValueError(f"z has length {len(z)}, expected dimension {g.dim}")
    return float(_gaussian_cdf_points(g, np.asarray([z], dtype=float), tol)[0])


def gaussian_cdf_grid(g: GaussianSpec, axes: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> np.ndarray:
    """gaussian_cdf on the product grid axes[0] x ... x axes[m-1]."""
    if len(axes) != g.dim:
        raise ValueError(f"{len(axes)} grid axes given, expected dimension {g.dim}")
    axes = [np.asarray(a, dtype=float) for a in axes]
    shape = tuple(len(a) for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([axis.ravel() for axis in mesh], axis=1)
    return _gaussian_cdf_points(g, points, tol).reshape(shape)


# --- Kolmogorov distance ---

def _padded_cumulative(tensor: np.ndarray) -> np.ndarray:
    """Cumulative sums along every axis with a leading zero slab per axis."""
    cumulative = tensor
    for axis in range(tensor.ndim):
        cumulative = np.cumsum(cumulative, axis=axis)
    padded = np.zeros(tuple(n + 1 for n in tensor.shape), dtype=tensor.dtype)
    padded[tuple(slice(1, None) for _ in range(tensor.ndim))] = cumulative
    return padded


def _lattice_vs_gaussian(d: LatticeDistribution, g: GaussianSpec, tol: float) -> float:
    if g.dim != d.dim:
        raise ValueError(f"dimension mismatch: {d.dim} vs {g.dim}")
    _check_gaussian_cdf(g)
    axis_values = _axis_values(d)
    cumulative = _padded_cumulative(_weight_tensor(d, axis_values, exact=False))
    candidates, indices = [], []
    for values in axis_values:
        v = np.array([float(x) for x in values])
        spread = float(v[-1] - v[0])
        eps = KOLMOGOROV_EPS_FACTOR * (spread if spread > 0 else max(1.0, abs(float(v[0]))))
        axis_candidates = np.unique(np.concatenate([v, v - eps, [np.inf]]))
        candidates.append(axis_candidates)
        indices.append(np.searchsorted(v, axis_candidates, side="right"))
    lattice_cdf = cumulative[np.ix_(*indices)]
    normal_cdf = gaussian_cdf_grid(g, candidates, tol)
    return float(np.max(np.abs(lattice_cdf - normal_cdf)))


def _lattice_vs_lattice(d: LatticeDistribution, other: LatticeDistribution) -> Fraction:
    if other.dim != d.dim:
        raise ValueError(f"dimension mismatch: {d.dim} vs {other.dim}")
    tables = []
    union = [sorted(set(a) | set(b)) for a, b in zip(_axis_values(d), _axis_values(other))]
    for dist in (d, other):
        own = _axis_values(dist)
        cumulative = _padded_cumulative(_weight_tensor(dist, own, exact=True))
        indices = [[bisect_right(values, c) for c in axis] + [len(values)] for values, axis in zip(own, union)]
        tables.append(cumulative[np.ix_(*indices)])
    # |A/a - B/b| = |A b - B a| / (a b), kept in integers
    difference = tables[0] * other.total - tables[1] * d.total
    largest = max(abs(int(x)) for x in difference.ravel())
    return Fraction(largest, d.total * other.total)


def kolmogorov_distance(d: LatticeDistribution, g: Union[GaussianSpec, LatticeDistribution],
                        tol: float = DEFAULT_TOL) -> Union[float, Fraction]:
    """
    sup_z |F_d(z) - F_g(z)|.

    Against a Gaussian, the sup is taken over the corner grid of every
    per-axis support value v, v - eps (eps = 1e-9 * axis range) and +inf.
    Against a second LatticeDistribution the result is exact.

    Raises:
        CapacityError: If m > MAX_GAUSSIAN_CDF_DIM.
        DegenerateCovarianceError: If g is a singular Gaussian.
    """
    if d.dim > MAX_GAUSSIAN_CDF_DIM:
        raise CapacityError(f"Kolmogorov distance dimension {d.dim} exceeds the limit {MAX_GAUSSIAN_CDF_DIM}")
    if isinstance(g, LatticeDistribution):
        return _lattice_vs_lattice(d, g)
    return _lattice_vs_gaussian(d, g, tol)

