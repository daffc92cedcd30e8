"""
Series Algebra Service
Truncated multivariate power series over pluggable coefficient rings:
exact rationals, floats, and polynomials in X (for the moment polynomials p_k).
"""
import math
from fractions import Fraction
from itertools import product as cartesian
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

from quasipower.errors import InsufficientOrderError

Exponent = Tuple[int, ...]


class Polynomial:
    """Univariate polynomial in X with exact rational coefficients (lowest degree first)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable[Any] = ()):
        coeffs = [Fraction(c) for c in coeffs]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs: Tuple[Fraction, ...] = tuple(coeffs)

    @classmethod
    def constant(cls, value: Any) -> "Polynomial":
        return cls([value])

    @classmethod
    def x(cls) -> "Polynomial":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def __call__(self, x: Any) -> Any:
        result: Any = Fraction(0)
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def _coerce(self, other: Any) -> "Polynomial":
        return other if isinstance(other, Polynomial) else Polynomial.constant(other)

    def __add__(self, other: Any) -> "Polynomial":
        other = self._coerce(other)
        size = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (size - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (size - len(other.coeffs))
        return Polynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other: Any) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "Polynomial":
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        result = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                result[i + j] += a * b
        return Polynomial(result)

    __rmul__ = __mul__

    def __truediv__(self, scalar: Any) -> "Polynomial":
        return Polynomial(c / Fraction(scalar) for c in self.coeffs)

    def __eq__(self, other: Any) -> bool:
        return self.coeffs == self._coerce(other).coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = [f"{c}*X^{i}" if i else str(c) for i, c in enumerate(self.coeffs) if c]
        return " + ".join(terms)


class CoefficientRing:
    """Arithmetic hooks a series needs beyond +, -, *."""

    name = "abstract"
    exact = True

    def zero(self) -> Any:
        raise NotImplementedError

    def one(self) -> Any:
        raise NotImplementedError

    def coerce(self, value: Any) -> Any:
        raise NotImplementedError

    def is_zero(self, value: Any) -> bool:
        return value == 0

    def divide(self, value: Any, n: int) -> Any:
        """value / n for a positive integer n."""
        return value / n

    def exp(self, value: Any) -> Any:
        raise ValueError(f"the {self.name} ring has no exponential for nonzero constants")

    def log(self, value: Any) -> Any:
        raise ValueError(f"the {self.name} ring has no logarithm for constants other than 1")


class RationalRing(CoefficientRing):
    name = "rational"

    def zero(self) -> Fraction:
        return Fraction(0)

    def one(self) -> Fraction:
        return Fraction(1)

    def coerce(self, value: Any) -> Fraction:
        return Fraction(value)

    def divide(self, value: Any, n: int) -> Fraction:
        return value / Fraction(n)


class FloatRing(CoefficientRing):
    name = "float"
    exact = False

    def __init__(self, zero_tol: float = 0.0):
        self.zero_tol = zero_tol

    def zero(self) -> float:
        return 0.0

    def one(self) -> float:
        return 1.0

    def coerce(self, value: Any) -> float:
        return float(value)

    def is_zero(self, value: Any) -> bool:
        return abs(value) <= self.zero_tol

    def exp(self, value: Any) -> float:
        return math.exp(value)

    def log(self, value: Any) -> float:
        return math.log(value)


class PolynomialRing(CoefficientRing):
    """Polynomials in X with rational coefficients."""

    name = "polynomial"

    def zero(self) -> Polynomial:
        return Polynomial()

    def one(self) -> Polynomial:
        return Polynomial.constant(1)

    def coerce(self, value: Any) -> Polynomial:
        return value if isinstance(value, Polynomial) else Polynomial.constant(value)

    def is_zero(self, value: Any) -> bool:
        return not self.coerce(value).coeffs


RATIONALS = RationalRing()
FLOATS = FloatRing()
POLYNOMIALS = PolynomialRing()

Bound = Union[Tuple[int, ...], int]


class MultiSeries:
    """
    Truncated power series in num_vars variables with a sparse coefficient map.

    Truncation is either per variable (bound is a tuple: exponent e is kept iff
    e_i <= bound_i for all i) or by total degree (total_degree=True, bound is
    an int: kept iff sum(e) <= bound).
    """

    def __init__(
        self,
        num_vars: int,
        bound: Bound,
        coefficients: Optional[Dict[Exponent, Any]] = None,
        ring: CoefficientRing = RATIONALS,
        total_degree: bool = False,
    ):
        if num_vars < 1:
            raise ValueError("num_vars must be at least 1")
        if total_degree:
            if not isinstance(bound, int) or bound < 0:
                raise ValueError("total-degree bound must be a nonnegative int")
        else:
            bound = tuple(bound)
            if len(bound) != num_vars or any(b < 0 for b in bound):
                raise ValueError(f"per-variable bound {bound} does not fit {num_vars} variables")
        self.num_vars = num_vars
        self.bound = bound
        self.ring = ring
        self.total_degree = total_degree
        self.coefficients: Dict[Exponent, Any] = {}
        for exponent, value in (coefficients or {}).items():
            exponent = tuple(exponent)
            if len(exponent) != num_vars:
                raise ValueError(f"exponent {exponent} does not fit {num_vars} variables")
            if not self.within(exponent):
                continue
            value = ring.coerce(value)
            if not ring.is_zero(value):
                self.coefficients[exponent] = value

    # --- construction helpers ---

    @classmethod
    def constant(cls, num_vars: int, bound: Bound, value: Any, ring: CoefficientRing = RATIONALS,
                 total_degree: bool = False) -> "MultiSeries":
        return cls(num_vars, bound, {(0,) * num_vars: value}, ring, total_degree)

    @classmethod
    def variable(cls, num_vars: int, index: int, bound: Bound, ring: CoefficientRing = RATIONALS,
                 total_degree: bool = False) -> "MultiSeries":
        """The series s_index (0-based index)."""
        exponent = tuple(1 if i == index else 0 for i in range(num_vars))
        return cls(num_vars, bound, {exponent: 1}, ring, total_degree)

    def _like(self, coefficients: Dict[Exponent, Any], bound: Optional[Bound] = None) -> "MultiSeries":
        return MultiSeries(self.num_vars, self.bound if bound is None else bound, coefficients,
                           self.ring, self.total_degree)

    # --- queries ---

    def within(self, exponent: Exponent) -> bool:
        if self.total_degree:
            return sum(exponent) <= self.bound
        return all(e <= b for e, b in zip(exponent, self.bound))

    def coefficient(self, exponent: Sequence[int]) -> Any:
        """[s^exponent] of the series; zero when absent."""
        exponent = tuple(exponent)
        if not self.within(exponent):
            raise InsufficientOrderError(
                f"coefficient {exponent} lies beyond the truncation {self.bound}; re-solve at a higher order"
            )
        return self.coefficients.get(exponent, self.ring.zero())

    @property
    def constant_term(self) -> Any:
        return self.coefficients.get((0,) * self.num_vars, self.ring.zero())

    @property
    def max_total_degree(self) -> int:
        """Largest total degree the truncation admits."""
        return self.bound if self.total_degree else sum(self.bound)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return (self.num_vars == other.num_vars and self.bound == other.bound
                and self.total_degree == other.total_degree and self.coefficients == other.coefficients)

    def __repr__(self) -> str:
        return f"MultiSeries(num_vars={self.num_vars}, bound={self.bound}, terms={len(self.coefficients)})"

    # --- arithmetic ---

    def _common_bound(self, other: "MultiSeries") -> Bound:
        if self.num_vars != other.num_vars:
            raise ValueError(f"variable-count mismatch: {self.num_vars} vs {other.num_vars}")
        if self.total_degree != other.total_degree:
            raise ValueError("cannot combine per-variable and total-degree truncations")
        if self.total_degree:
            return min(self.bound, other.bound)
        return tuple(min(a, b) for a, b in zip(self.bound, other.bound))

    def _lift(self, other: Any) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            return other
        return MultiSeries.constant(self.num_vars, self.bound, other, self.ring, self.total_degree)

    def __add__(self, other: Any) -> "MultiSeries":
        return series_add(self, self._lift(other))

    __radd__ = __add__

    def __neg__(self) -> "MultiSeries":
        return self._like({e: -c for e, c in self.coefficients.items()})

    def __sub__(self, other: Any) -> "MultiSeries":
        return series_add(self, -self._lift(other))

    def __rsub__(self, other: Any) -> "MultiSeries":
        return series_add(self._lift(other), -self)

    def __mul__(self, other: Any) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            return series_mul(self, other)
        scalar = self.ring.coerce(other)
        return self._like({e: c * scalar for e, c in self.coefficients.items()})

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "MultiSeries":
        if not isinstance(power, int) or power < 0:
            raise ValueError("series powers must be nonnegative integers")
        result = MultiSeries.constant(self.num_vars, self.bound, self.ring.one(), self.ring, self.total_degree)
        base = self
        while power:
            if power & 1:
                result = result * base
            power >>= 1
            if power:
                base = base * base
        return result

    def euler(self) -> "MultiSeries":
        """Euler operator sum_i s_i d/ds_i: multiplies each term by its total degree."""
        return self._like({e: c * sum(e) for e, c in self.coefficients.items() if sum(e)})

    def euler_inverse(self) -> "MultiSeries":
        """Inverse of the Euler operator on series without constant term."""
        return self._like({e: self.ring.divide(c, sum(e)) for e, c in self.coefficients.items() if sum(e)})


def series_add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Sum of two series, truncated to the smaller bound."""
    bound = a._common_bound(b)
    coefficients = dict(a.coefficients)
    for exponent, value in b.coefficients.items():
        coefficients[exponent] = coefficients[exponent] + value if exponent in coefficients else value
    return a._like(coefficients, bound)


def series_mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Cauchy product of two series, truncated to the smaller bound."""
    bound = a._common_bound(b)
    result = MultiSeries(a.num_vars, bound, None, a.ring, a.total_degree)
    coefficients: Dict[Exponent, Any] = {}
    right = list(b.coefficients.items())
    for ea, ca in a.coefficients.items():
        if not result.within(ea):
            continue
        for eb, cb in right:
            exponent = tuple(x + y for x, y in zip(ea, eb))
            if not result.within(exponent):
                continue
            term = ca * cb
            coefficients[exponent] = coefficients[exponent] + term if exponent in coefficients else term
    return a._like(coefficients, bound)


def series_inverse(a: MultiSeries) -> MultiSeries:
    """
    Multiplicative inverse by order-doubling Newton iteration h <- h (2 - a h).

    Raises:
        ValueError: If the constant term is zero.
    """
    c0 = a.constant_term
    if a.ring.is_zero(c0):
        raise ValueError("series with zero constant term is not invertible")
    if isinstance(c0, Polynomial):
        if c0 != 1:
            raise ValueError("polynomial-ring inverse needs constant term 1")
        seed = a.ring.one()
    else:
        seed = a.ring.one() / c0
    h = MultiSeries.constant(a.num_vars, a.bound, seed, a.ring, a.total_degree)
    precision = 1
    while precision <= a.max_total_degree:
        h = h * (2 - a * h)
        precision *= 2
    return h


def _nilpotent_sum(b: MultiSeries, coefficient) -> MultiSeries:
    """sum_{n>=0} coefficient(n) b^n by Horner, for b without constant term."""
    depth = b.max_total_degree
    one = MultiSeries.constant(b.num_vars, b.bound, b.ring.one(), b.ring, b.total_degree)
    result = one * coefficient(depth)
    for n in range(depth - 1, -1, -1):
        result = one * coefficient(n) + b * result
    return result


def series_exp(a: MultiSeries) -> MultiSeries:
    """
    exp(a) truncated.

    Exact rings use the direct factorial sum; the float ring uses the
    order-doubling Newton iteration g <- g (1 + a - log g).

    Raises:
        ValueError: If the constant term is nonzero and the ring has no exp.
    """
    c0 = a.constant_term
    scale = None
    if not a.ring.is_zero(c0):
        scale = a.ring.exp(c0)
        a = a - c0
    if a.ring.exact:
        result = _nilpotent_sum(a, lambda n: Fraction(1, math.factorial(n)))
    else:
        result = MultiSeries.constant(a.num_vars, a.bound, a.ring.one(), a.ring, a.total_degree)
        precision = 1
        while precision <= a.max_total_degree:
            result = result * (1 + a - series_log(result))
            precision *= 2
    return result * scale if scale is not None else result


def series_log(a: MultiSeries) -> MultiSeries:
    """
    log(a) for a series with constant term 1, via log a = E^{-1}(E(a) / a)
    where E is the Euler operator.

    Raises:
        ValueError: If the constant term is not 1.
    """
    c0 = a.constant_term
    if c0 != 1:
        raise ValueError(f"series_log needs constant term 1, got {c0}")
    return (a.euler() * series_inverse(a)).euler_inverse()


class MomentPolynomial:
    """p_k(X) = [s^k] exp(u(s) X + v(s))."""

    def __init__(self, exponent: Sequence[int], poly: Polynomial):
        self.exponent: Exponent = tuple(exponent)
        if poly.degree > sum(self.exponent):
            raise ValueError(f"degree {poly.degree} exceeds sum(k) = {sum(self.exponent)}")
        self.poly = poly

    def __call__(self, x: Any) -> Any:
        return self.poly(x)

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __repr__(self) -> str:
        return f"MomentPolynomial(k={self.exponent}, p={self.poly!r})"


def _check_order(series: MultiSeries, k: Exponent, name: str) -> None:
    if series.total_degree:
        ok = sum(k) <= series.bound
    else:
        ok = all(ki <= bi for ki, bi in zip(k, series.bound))
    if not ok:
        raise InsufficientOrderError(f"truncation {series.bound} of {name} is too low for k = {k}")


def moment_polynomials(u: MultiSeries, v: MultiSeries, k: Sequence[int]) -> MomentPolynomial:
    """
    Moment polynomial p_k(X) = [s_1^k_1 ... s_m^k_m] e^{u(s) X + v(s)}.

    Computed by series exponentiation over the ring of polynomials in X.

    Args:
        u: Series with u(0) = 0.
        v: Series with v(0) = 0.
        k: Exponent vector.

    Raises:
        ValueError: If u(0) or v(0) is nonzero, or k has the wrong length.
        InsufficientOrderError: If u or v is truncated below k.
    """
    k = tuple(k)
    if len(k) != u.num_vars or u.num_vars != v.num_vars:
        raise ValueError("k, u and v must share the number of variables")
    if u.constant_term != 0 or v.constant_term != 0:
        raise ValueError("moment polynomials need u(0) = v(0) = 0")
    _check_order(u, k, "u")
    _check_order(v, k, "v")
    bound = k if not u.total_degree else sum(k)
    x = Polynomial.x()
    exponent_series = MultiSeries(
        u.num_vars, bound,
        {e: Polynomial.constant(c) * x for e, c in u.coefficients.items()},
        POLYNOMIALS, u.total_degree,
    ) + MultiSeries(
        v.num_vars, bound,
        {e: Polynomial.constant(c) for e, c in v.coefficients.items()},
        POLYNOMIALS, v.total_degree,
    )
    return MomentPolynomial(k, series_exp(exponent_series).coefficient(k))


def mgf_series(points: Iterable[Sequence[Any]], weights: Iterable[int], order: Union[int, Sequence[int]],
               ring: CoefficientRing = RATIONALS) -> MultiSeries:
    """
    E e^{<s, X>} of a finite distribution as a truncated series:
    [s^k] = sum_j p_j prod_l x_{j,l}^{k_l} / k_l!.
    """
    points = [tuple(p) for p in points]
    weights = list(weights)
    total = sum(weights)
    m = len(points[0])
    bound = tuple(order) if not isinstance(order, int) else (order,) * m
    coefficients: Dict[Exponent, Any] = {}
    for exponent in cartesian(*(range(b + 1) for b in bound)):
        denominator = 1
        for e in exponent:
            denominator *= math.factorial(e)
        moment = Fraction(0)
        for point, weight in zip(points, weights):
            term = Fraction(weight)
            for x, e in zip(point, exponent):
                term *= Fraction(x) ** e
            moment += term
        coefficients[exponent] = ring.coerce(moment / (total * denominator))
    return MultiSeries(m, bound, coefficients, ring)
