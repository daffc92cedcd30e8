"""
Quadrature Service
Tensor-product Gauss-Legendre integration over axis-aligned boxes (m <= 3).
Panels are split at 0 so no node ever sits on a coordinate hyperplane.
"""
import sys
import warnings
from functools import lru_cache
from typing import Callable, List, Sequence, Tuple

import numpy as np

from quasipower.config import (
    DEFAULT_MAX_LEVEL,
    DEFAULT_NODES_PER_PANEL,
    DEFAULT_PANELS_PER_SIGN,
    MAX_QUADRATURE_DIM,
    MAX_QUADRATURE_NODES,
)
from quasipower.errors import CapacityError, QuadratureNonConvergence
from quasipower.schemas import QuadratureResult

Box = Sequence[Tuple[float, float]]
# A tensor integrand receives one node array per axis and returns the
# values on the full product grid, shape (len(nodes_1), ..., len(nodes_m)).
TensorIntegrand = Callable[[List[np.ndarray]], np.ndarray]


@lru_cache(maxsize=32)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    if n < 1:
        raise ValueError("Unsupported quadrature node count")
    return np.polynomial.legendre.leggauss(n)


def _panel_edges(lo: float, hi: float, panels_per_sign: int) -> List[float]:
    if lo < 0.0 < hi:
        negative = np.linspace(lo, 0.0, panels_per_sign + 1)
        positive = np.linspace(0.0, hi, panels_per_sign + 1)
        return list(negative) + list(positive[1:])
    return list(np.linspace(lo, hi, panels_per_sign + 1))


class QuadratureGrid:
    """Per-axis Gauss-Legendre nodes and weights over a panelled box."""

    def __init__(self, box: Box, nodes_per_panel: int, panels_per_sign: int):
        self.box = tuple((float(lo), float(hi)) for lo, hi in box)
        self.nodes_per_panel = nodes_per_panel
        self.panels_per_sign = panels_per_sign
        reference_nodes, reference_weights = _legendre(nodes_per_panel)
        self.nodes: List[np.ndarray] = []
        self.weights: List[np.ndarray] = []
        for lo, hi in self.box:
            edges = _panel_edges(lo, hi, panels_per_sign)
            axis_nodes, axis_weights = [], []
            for a, b in zip(edges[:-1], edges[1:]):
                axis_nodes.append(0.5 * (a + b) + 0.5 * (b - a) * reference_nodes)
                axis_weights.append(0.5 * (b - a) * reference_weights)
            self.nodes.append(np.concatenate(axis_nodes))
            self.weights.append(np.concatenate(axis_weights))

    @property
    def dim(self) -> int:
        return len(self.box)

    @property
    def total_nodes(self) -> int:
        return int(np.prod([len(axis) for axis in self.nodes]))

    def touches_hyperplane(self) -> bool:
        """True if some node has a zero coordinate (never for boxes split at 0)."""
        return any(bool(np.any(axis == 0.0)) for axis in self.nodes)


def _check_box(box: Box) -> None:
    if not box:
        raise ValueError("box must have at least one axis")
    if len(box) > MAX_QUADRATURE_DIM:
        raise CapacityError(f"quadrature dimension {len(box)} exceeds the limit {MAX_QUADRATURE_DIM}")
    for lo, hi in box:
        if not lo < hi:
            raise ValueError(f"empty box interval [{lo}, {hi}]")


def build_grid(box: Box, nodes_per_panel: int = DEFAULT_NODES_PER_PANEL,
               panels_per_sign: int = DEFAULT_PANELS_PER_SIGN) -> QuadratureGrid:
    """
    Builds the panelled Gauss-Legendre grid for a box.

    Raises:
        ValueError: If the box is empty or nodes_per_panel < 1.
        CapacityError: If the box has more than MAX_QUADRATURE_DIM axes.
    """
    _check_box(box)
    if panels_per_sign < 1:
        raise ValueError("panels_per_sign must be at least 1")
    return QuadratureGrid(box, nodes_per_panel, panels_per_sign)


def integrate_box(f: TensorIntegrand, box: Box, grid: QuadratureGrid = None):
    """
    Tensor-product Gauss-Legendre estimate of the integral of f over box.

    Args:
        f: Tensor integrand (see TensorIntegrand).
        box: Per-axis intervals (lo, hi).
        grid: Precomputed grid for this box; built with defaults when omitted.

    Returns:
        Integral estimate, complex when f is complex-valued.
    """
    if grid is None:
        grid = build_grid(box)
    elif tuple((float(lo), float(hi)) for lo, hi in box) != grid.box:
        raise ValueError("grid was built for a different box")
    values = np.asarray(f(grid.nodes))
    expected = tuple(len(axis) for axis in grid.nodes)
    if values.shape != expected:
        values = np.broadcast_to(values, expected)
    # contract the leading axis with its weights, one axis at a time
    for weights in grid.weights:
        values = np.tensordot(weights, values, axes=([0], [0]))
    result = values.item() if isinstance(values, np.ndarray) else values
    return result


def refine_until(f: TensorIntegrand, box: Box, rel_tol: float, max_level: int = DEFAULT_MAX_LEVEL,
                 nodes_per_panel: int = DEFAULT_NODES_PER_PANEL,
                 panels_per_sign: int = DEFAULT_PANELS_PER_SIGN, abs_tol: float = 0.0) -> QuadratureResult:
    """
    Doubles the nodes per panel until successive estimates agree to
    max(rel_tol * |estimate|, abs_tol).

    Refinement also stops, flagged, before a level whose tensor grid would
    exceed MAX_QUADRATURE_NODES.

    Args:
        f: Tensor integrand.
        box: Integration box.
        rel_tol: Relative tolerance between successive levels.
        max_level: Maximum number of doublings.
        abs_tol: Absolute floor on the accepted change; integrals that vanish
            identically only converge through it.

    Returns:
        QuadratureResult; converged=False also emits a QuadratureNonConvergence warning.

    Raises:
        ValueError: If rel_tol <= 0 or abs_tol < 0.
    """
    if rel_tol <= 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    if abs_tol < 0:
        raise ValueError(f"abs_tol must be nonnegative, got {abs_tol}")
    _check_box(box)
    n = nodes_per_panel
    previous = integrate_box(f, box, build_grid(box, n, panels_per_sign))
    delta = float("inf")
    level = 0
    while level < max_level:
        next_nodes = (2 * n * 2 * panels_per_sign) ** len(box)
        if next_nodes > MAX_QUADRATURE_NODES:
            print(f"[Quadrature] node budget reached at {n} nodes/panel", file=sys.stderr)
            break
        n *= 2
        level += 1
        current = integrate_box(f, box, build_grid(box, n, panels_per_sign))
        delta = abs(current - previous)
        previous = current
        if delta <= max(rel_tol * abs(current), abs_tol, np.finfo(float).tiny):
            return QuadratureResult(value=current, error_estimate=delta, converged=True,
                                    nodes_per_panel=n, level=level)
    warnings.warn(
        f"quadrature did not reach rel_tol={rel_tol:g} after {level} refinements "
        f"(last change {delta:.3e})",
        QuadratureNonConvergence,
        stacklevel=2,
    )
    return QuadratureResult(value=previous, error_estimate=delta if np.isfinite(delta) else abs(previous),
                            converged=False, nodes_per_panel=n, level=level)


def pointwise(func: Callable[[Tuple[float, ...]], complex]) -> TensorIntegrand:
    """Adapts a point function f(t) into a tensor integrand (slow; for tests and spot checks)."""

    def tensor(nodes: List[np.ndarray]) -> np.ndarray:
        mesh = np.meshgrid(*nodes, indexing="ij")
        flat = zip(*(axis.ravel() for axis in mesh))
        values = np.array([func(tuple(float(c) for c in point)) for point in flat])
        return values.reshape(mesh[0].shape)

    return tensor
