"""
Data Schemas for the Quasi-Power Lab
Pydantic models for type-safe value objects shared across the services.
"""
import math
from fractions import Fraction
from numbers import Real
from typing import Any, Callable, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from quasipower.config import ARTIFACT_NAME, ARTIFACT_VERSION


def exact_to_json(value: Any) -> Any:
    """Render an exact number for JSON/CSV: ints stay ints, rationals become 'p/q'."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def exact_from_json(value: Any) -> Any:
    """Inverse of exact_to_json."""
    if isinstance(value, str):
        return Fraction(value)
    return value


# --- Partition lattice ---

class SetPartition(BaseModel):
    """A partition of a finite index set K into nonempty, pairwise-disjoint blocks."""
    model_config = ConfigDict(frozen=True)

    ground_set: Tuple[int, ...] = Field(..., description="The index set K, sorted")
    blocks: Tuple[Tuple[int, ...], ...] = Field(
        ..., description="Blocks, each sorted, ordered by minimum element"
    )

    @model_validator(mode="before")
    @classmethod
    def _canonicalize(cls, data: Any) -> Any:
        if isinstance(data, dict) and "blocks" in data:
            blocks = [tuple(sorted(block)) for block in data["blocks"]]
            data = dict(data)
            data["blocks"] = tuple(sorted(blocks, key=lambda b: b[0] if b else -math.inf))
            if "ground_set" in data:
                data["ground_set"] = tuple(sorted(data["ground_set"]))
            else:
                data["ground_set"] = tuple(sorted(k for block in blocks for k in block))
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "SetPartition":
        seen: set = set()
        for block in self.blocks:
            if not block:
                raise ValueError("partition contains an empty block")
            if seen.intersection(block):
                raise ValueError("partition blocks are not pairwise disjoint")
            seen.update(block)
        if seen != set(self.ground_set) or len(self.ground_set) != len(seen):
            raise ValueError("union of blocks differs from the ground set")
        return self

    @property
    def size(self) -> int:
        """Number of blocks |alpha|."""
        return len(self.blocks)


class SmoothingConstants(BaseModel):
    """Dimension-dependent constants C1, C2 of the smoothing summand."""
    model_config = ConfigDict(frozen=True)

    dimension: int = Field(..., ge=1)
    c1: float = Field(..., gt=0)
    c2: float = Field(..., gt=0)


class LambdaTerm(BaseModel):
    """One summand mu_alpha * prod_{J in alpha} h o psi_{J,K} of the Lambda operator."""
    model_config = ConfigDict(frozen=True)

    partition: SetPartition
    coefficient: int
    factors: Tuple[Tuple[int, ...], ...] = Field(
        ..., description="Blocks J; each factor is h evaluated at the projection onto J"
    )

    @model_validator(mode="after")
    def _check_coefficient(self) -> "LambdaTerm":
        k = self.partition.size
        if self.coefficient != (-1) ** (k - 1) * math.factorial(k - 1):
            raise ValueError("coefficient does not match the Mobius value of the partition")
        if tuple(self.factors) != tuple(self.partition.blocks):
            raise ValueError("one factor per block is required")
        return self


# --- Distributions ---

class LatticeDistribution(BaseModel):
    """Finite discrete m-dimensional distribution with exact integer weights."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int = Field(..., ge=1, description="Dimension m")
    points: Tuple[Tuple[Any, ...], ...] = Field(..., description="Distinct support points")
    weights: Tuple[int, ...] = Field(..., description="Positive integer weight per point")

    @model_validator(mode="after")
    def _check_atoms(self) -> "LatticeDistribution":
        if not self.points:
            raise ValueError("distribution needs at least one atom")
        if len(self.points) != len(self.weights):
            raise ValueError("points and weights differ in length")
        for point in self.points:
            if len(point) != self.dim:
                raise ValueError(f"support point {point} does not have dimension {self.dim}")
            for coordinate in point:
                if isinstance(coordinate, bool) or not isinstance(coordinate, Real):
                    raise ValueError(f"coordinate {coordinate!r} is not a real number")
        if any(weight <= 0 for weight in self.weights):
            raise ValueError("weights must be positive")
        if len(set(self.points)) != len(self.points):
            raise ValueError("support points must be pairwise distinct")
        return self

    @property
    def total(self) -> int:
        return sum(self.weights)

    def probabilities(self) -> np.ndarray:
        """Float probabilities weight/total (int true division is correctly rounded)."""
        total = self.total
        return np.array([weight / total for weight in self.weights], dtype=float)

    def float_points(self) -> np.ndarray:
        return np.array([[float(c) for c in point] for point in self.points], dtype=float)

    def to_payload(self) -> Dict[str, Any]:
        """Documented JSON form {dim, atoms: [{x: [...], w: "<decimal>"}]}."""
        return {
            "dim": self.dim,
            "atoms": [
                {"x": [exact_to_json(c) for c in point], "w": str(weight)}
                for point, weight in zip(self.points, self.weights)
            ],
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "LatticeDistribution":
        atoms = payload["atoms"]
        return cls(
            dim=payload["dim"],
            points=tuple(tuple(exact_from_json(c) for c in atom["x"]) for atom in atoms),
            weights=tuple(int(atom["w"]) for atom in atoms),
        )


class GaussianSpec(BaseModel):
    """m-dimensional normal distribution with mean and covariance Sigma."""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(..., ge=1)
    mean: Tuple[float, ...]
    cov: Tuple[Tuple[float, ...], ...]

    @model_validator(mode="after")
    def _check_covariance(self) -> "GaussianSpec":
        if len(self.mean) != self.dim or len(self.cov) != self.dim:
            raise ValueError("mean/cov shape does not match dim")
        if any(len(row) != self.dim for row in self.cov):
            raise ValueError("covariance must be square")
        matrix = np.array(self.cov, dtype=float)
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if not np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12 * scale):
            raise ValueError("covariance must be symmetric")
        if float(np.min(np.linalg.eigvalsh(matrix))) < -1e-12 * scale:
            raise ValueError("covariance must be positive semi-definite")
        return self

    @property
    def cov_matrix(self) -> np.ndarray:
        return np.array(self.cov, dtype=float)

    @property
    def non_degenerate(self) -> bool:
        eigenvalues = np.linalg.eigvalsh(self.cov_matrix)
        return bool(eigenvalues.min() > 1e-12 * max(1.0, float(eigenvalues.max())))


# --- Quadrature ---

class QuadratureResult(BaseModel):
    """Outcome of a refinement run; converged=False means the estimate is flagged."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    value: Any = Field(..., description="Integral estimate (float or complex)")
    error_estimate: float = Field(..., ge=0, description="Last absolute change between levels")
    converged: bool
    nodes_per_panel: int = Field(..., ge=1)
    level: int = Field(..., ge=0, description="Refinements performed")


# --- Berry-Esseen reports ---

class BoundReport(BaseModel):
    """Itemized right-hand side of the m-dimensional Berry-Esseen inequality."""
    variant: Literal["theorem", "recursive"] = "theorem"
    dimension: int = Field(..., ge=1)
    T: float = Field(..., gt=0)
    integral_term: float = Field(..., ge=0)
    marginal_term: float = Field(..., ge=0)
    smoothing_term: float = Field(..., ge=0)
    rhs_total: float = Field(..., ge=0)
    lhs_sup: Optional[float] = Field(None, description="sup |F_X - F_Y| when computed")
    marginal_sups: Dict[str, float] = Field(
        default_factory=dict, description="Subset J (comma-joined axes) -> sup |F_XJ - F_YJ|"
    )
    multipliers: Dict[str, float] = Field(
        default_factory=dict, description="Recursive variant: subset K -> constant multiplier"
    )
    quadrature_error: float = Field(0.0, ge=0)
    quadrature_converged: bool = True

    @model_validator(mode="after")
    def _check_total(self) -> "BoundReport":
        expected = self.integral_term + self.marginal_term + self.smoothing_term
        if abs(expected - self.rhs_total) > 1e-12 * max(1.0, abs(expected)):
            raise ValueError("rhs_total must equal the sum of the three terms")
        return self


class InequalityCheck(BaseModel):
    """One row of an inequality verification sweep."""
    T: float
    lhs: float
    rhs: float
    slack: float = Field(..., ge=0)
    holds: bool
    report: Optional[BoundReport] = None


# --- Quasi-power studies ---

class ConvergenceRow(BaseModel):
    """Kolmogorov distance of one standardized family member to its normal limit."""
    n: int
    phi_n: float
    distance: float = Field(..., ge=0, le=1)
    normalized: float = Field(..., description="distance * sqrt(phi_n)")
    mode: Literal["exact", "analytic"]
    axes: Tuple[int, ...] = Field(..., description="1-based coordinates kept in the comparison")


class MomentRow(BaseModel):
    """Exact cross-moment against the moment polynomial p_k(phi_n)."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    k: Tuple[int, ...]
    exact: Any
    predicted: Any
    abs_error: Any

    @field_serializer("exact", "predicted", "abs_error")
    def _serialize_exact(self, value: Any) -> Any:
        return exact_to_json(value)


class DegenerateRow(BaseModel):
    """Sup distance of the +-1/sqrt(n) walk to its point-mass limit."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    distance: Any
    gaussian_floor_distance: Optional[float] = None

    @field_serializer("distance")
    def _serialize_distance(self, value: Any) -> Any:
        return exact_to_json(value)


class QuasiPowerFamily(BaseModel):
    """A sequence Omega_n of distributions with scale phi_n and optional analytic data."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    dim: int = Field(..., ge=1)
    generator: Callable[[int], LatticeDistribution]
    phi: Callable[[int], Any]
    kappa: Callable[[int], float] = Field(default=lambda n: math.inf)
    u: Optional[Any] = Field(None, description="MultiSeries u(s)")
    v: Optional[Any] = Field(None, description="MultiSeries v(s)")
    grad_u0: Optional[Tuple[Any, ...]] = None
    hess_u0: Optional[Tuple[Tuple[Any, ...], ...]] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _check_analytic_data(self) -> "QuasiPowerFamily":
        if self.hess_u0 is not None:
            m = len(self.hess_u0)
            for i in range(m):
                for j in range(m):
                    if self.hess_u0[i][j] != self.hess_u0[j][i]:
                        raise ValueError("hess_u0 must be symmetric")
        if self.u is not None and self.grad_u0 is not None:
            for j, expected in enumerate(self.grad_u0):
                exponent = tuple(1 if i == j else 0 for i in range(self.dim))
                if abs(float(self.u.coefficient(exponent)) - float(expected)) > 1e-12:
                    raise ValueError("grad_u0 is inconsistent with the series u")
        if self.u is not None and self.hess_u0 is not None:
            # [s_i s_j] u = H_ij for i != j and H_ii / 2 on the diagonal
            for i in range(self.dim):
                for j in range(i, self.dim):
                    exponent = tuple((k == i) + (k == j) for k in range(self.dim))
                    if not self.u.within(exponent):
                        continue
                    expected = float(self.hess_u0[i][j]) / (2.0 if i == j else 1.0)
                    if abs(float(self.u.coefficient(exponent)) - expected) > 1e-12 * max(1.0, abs(expected)):
                        raise ValueError("hess_u0 is inconsistent with the series u")
        return self

    @property
    def has_analytic_data(self) -> bool:
        return self.u is not None and self.grad_u0 is not None and self.hess_u0 is not None


# --- Example models ---

class GrammarRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    lhs: str
    rhs: Tuple[str, ...]


class Grammar(BaseModel):
    """Context-free grammar with a declared, ordered set of tracked terminals."""
    model_config = ConfigDict(frozen=True)

    terminals: Tuple[str, ...]
    nonterminals: Tuple[str, ...]
    start: str
    rules: Tuple[GrammarRule, ...]
    tracked: Tuple[str, ...]

    @model_validator(mode="after")
    def _check_grammar(self) -> "Grammar":
        terminals, nonterminals = set(self.terminals), set(self.nonterminals)
        if terminals & nonterminals:
            raise ValueError(f"symbols declared twice: {sorted(terminals & nonterminals)}")
        if self.start not in nonterminals:
            raise ValueError(f"start symbol '{self.start}' is not a nonterminal")
        for rule in self.rules:
            if rule.lhs not in nonterminals:
                raise ValueError(f"rule lhs '{rule.lhs}' is not a nonterminal")
            if not rule.rhs:
                raise ValueError(f"rule for '{rule.lhs}' has an empty right side")
            for symbol in rule.rhs:
                if symbol not in terminals and symbol not in nonterminals:
                    raise ValueError(f"undeclared symbol '{symbol}'")
            if not any(symbol in terminals for symbol in rule.rhs):
                raise ValueError(f"rule {rule.lhs} -> {' '.join(rule.rhs)} has no terminal")
        if not any(rule.lhs == self.start for rule in self.rules):
            raise ValueError(f"start symbol '{self.start}' has no rule")
        for symbol in self.tracked:
            if symbol not in terminals:
                raise ValueError(f"tracked symbol '{symbol}' is not a terminal")
        if len(set(self.tracked)) != len(self.tracked):
            raise ValueError("tracked symbols must be distinct")
        return self


class DissectionSpec(BaseModel):
    """Allowed polygon-size classes S_1..S_t; every other size is forbidden."""
    model_config = ConfigDict(frozen=True)

    classes: Tuple[Tuple[int, ...], ...]

    @model_validator(mode="after")
    def _check_classes(self) -> "DissectionSpec":
        if not self.classes:
            raise ValueError("at least one size class is required")
        seen: set = set()
        for sizes in self.classes:
            if not sizes:
                raise ValueError("size classes must be nonempty")
            for k in sizes:
                if k < 3:
                    raise ValueError(f"polygon size {k} is below 3")
                if k in seen:
                    raise ValueError(f"polygon size {k} appears in two classes")
                seen.add(k)
        return self

    @property
    def num_classes(self) -> int:
        return len(self.classes)


# --- Runs ---

class RunConfig(BaseModel):
    """Echo of a CLI invocation, embedded into every output file."""
    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    output_path: Optional[str] = None
    output_format: Literal["csv", "json"] = "csv"
    deterministic: Literal[True] = True
    notes: Dict[str, Any] = Field(
        default_factory=dict, description="Model assumptions surfaced to readers (probability model, certificates)"
    )

    def metadata(self) -> Dict[str, Any]:
        metadata = {
            "artifact": ARTIFACT_NAME,
            "version": ARTIFACT_VERSION,
            "command": self.command,
            "parameters": {key: self.parameters[key] for key in sorted(self.parameters)},
        }
        if self.notes:
            metadata["notes"] = {key: self.notes[key] for key in sorted(self.notes)}
        return metadata


def subset_key(subset: Tuple[int, ...]) -> str:
    """Stable string key for an index subset, e.g. (1, 3) -> '1,3'."""
    return ",".join(str(k) for k in sorted(subset))
