"""
Test Series Algebra
"""
import math
from fractions import Fraction

import numpy as np
import pytest

from quasipower.errors import InsufficientOrderError
from quasipower.services.series_algebra import (
    FLOATS,
    MultiSeries,
    Polynomial,
    mgf_series,
    moment_polynomials,
    series_add,
    series_exp,
    series_inverse,
    series_log,
    series_mul,
)


def _one_plus_s(order):
    return MultiSeries(1, (order,), {(0,): 1, (1,): 1})


def test_polynomial_arithmetic():
    x = Polynomial.x()
    p = (x + 1) * (x - 1)
    assert p == Polynomial([-1, 0, 1])
    assert p.degree == 2
    assert p(Fraction(3)) == 8
    assert Polynomial().degree == -1


def test_inverse_of_one_minus_s_is_geometric():
    series = MultiSeries(1, (6,), {(0,): 1, (1,): -1})
    inverse = series_inverse(series)
    assert all(inverse.coefficient((k,)) == 1 for k in range(7))


def test_inverse_rejects_zero_constant():
    with pytest.raises(ValueError):
        series_inverse(MultiSeries(1, (3,), {(1,): 1}))


def test_log_of_one_plus_s():
    log = series_log(_one_plus_s(6))
    assert [log.coefficient((k,)) for k in range(7)] == [0] + [Fraction((-1) ** (k + 1), k) for k in range(1, 7)]


def test_exp_inverts_log():
    series = MultiSeries(2, (3, 3), {(0, 0): 1, (1, 0): Fraction(1, 2), (1, 1): 3, (0, 2): -1})
    assert series_exp(series_log(series)) == series


def test_exp_float_ring_matches_taylor():
    s = MultiSeries.variable(1, 0, (8,), FLOATS)
    exp = series_exp(s)
    for k in range(9):
        assert exp.coefficient((k,)) == pytest.approx(1.0 / math.factorial(k))


def test_log_requires_unit_constant():
    with pytest.raises(ValueError):
        series_log(MultiSeries(1, (3,), {(0,): 2, (1,): 1}))


def test_coefficient_beyond_truncation_raises():
    with pytest.raises(InsufficientOrderError):
        _one_plus_s(2).coefficient((3,))


def test_total_degree_truncation():
    s = MultiSeries.variable(2, 0, 2, total_degree=True)
    t = MultiSeries.variable(2, 1, 2, total_degree=True)
    product = (1 + s + t) ** 3
    assert product.max_total_degree == 2
    assert product.coefficient((1, 1)) == 6
    assert (2, 1) not in product.coefficients


def test_mgf_of_fair_coin():
    mgf = mgf_series([(-1,), (1,)], [1, 1], 4)
    assert [mgf.coefficient((k,)) for k in range(5)] == [1, 0, Fraction(1, 2), 0, Fraction(1, 24)]


def test_coin_moment_polynomials():
    u = series_log(mgf_series([(-1,), (1,)], [1, 1], 4))
    v = MultiSeries(1, (4,))
    second = moment_polynomials(u, v, (2,))
    fourth = moment_polynomials(u, v, (4,))
    assert second.poly == Polynomial([0, Fraction(1, 2)])
    # E S_n^4 / 4! = (3n^2 - 2n) / 24
    assert fourth.poly == Polynomial([0, Fraction(-1, 12), Fraction(1, 8)])
    assert fourth.degree == 2


def test_moment_polynomials_need_zero_constants():
    u = MultiSeries(1, (2,), {(0,): 1, (1,): 1})
    with pytest.raises(ValueError):
        moment_polynomials(u, MultiSeries(1, (2,)), (1,))


def test_moment_polynomials_need_enough_order():
    u = MultiSeries(1, (2,), {(1,): 1})
    with pytest.raises(InsufficientOrderError):
        moment_polynomials(u, MultiSeries(1, (2,)), (3,))


def test_add_and_mul_truncate_to_smaller_bound():
    a = MultiSeries(2, (2, 1), {(0, 0): 1, (2, 1): 3, (1, 0): 1})
    b = MultiSeries(2, (1, 1), {(1, 0): 2, (0, 1): 1})
    total = series_add(a, b)
    assert total.bound == (1, 1)
    assert total.coefficients == {(0, 0): 1, (1, 0): 3, (0, 1): 1}
    product = series_mul(a, b)
    assert product.coefficients == {(1, 0): 2, (0, 1): 1, (1, 1): 1}


def test_add_rejects_mixed_truncations():
    with pytest.raises(ValueError, match="cannot combine"):
        series_add(_one_plus_s(2), MultiSeries(1, 2, {(0,): 1}, total_degree=True))


BOUND = (3, 2)


def _random_series(seed, unit_constant=False):
    rng = np.random.default_rng(seed)
    coefficients = {
        (i, j): Fraction(int(rng.integers(-6, 7)), int(rng.integers(1, 6)))
        for i in range(BOUND[0] + 1) for j in range(BOUND[1] + 1)
    }
    if unit_constant:
        coefficients[(0, 0)] = Fraction(1)
    return MultiSeries(2, BOUND, coefficients)


def _convolve(a, b):
    """Term-by-term product kept within the truncation."""
    product = {}
    for (i, j), x in a.coefficients.items():
        for (k, l), y in b.coefficients.items():
            if i + k <= BOUND[0] and j + l <= BOUND[1]:
                product[(i + k, j + l)] = product.get((i + k, j + l), 0) + x * y
    return MultiSeries(2, BOUND, product)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_product_matches_convolution(seed):
    a, b = _random_series(seed), _random_series(seed + 100)
    assert series_mul(a, b) == _convolve(a, b)


@pytest.mark.parametrize("seed", [4, 5])
def test_ring_axioms(seed):
    a, b, c = _random_series(seed), _random_series(seed + 10), _random_series(seed + 20)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@pytest.mark.parametrize("seed", [6, 7])
def test_inverse_is_multiplicative_inverse(seed):
    a = _random_series(seed, unit_constant=True)
    one = MultiSeries.constant(2, BOUND, 1)
    assert a * series_inverse(a) == one
    assert _convolve(a, series_inverse(a)) == one


def test_exp_of_sum_of_variables():
    s = MultiSeries.variable(2, 0, (4, 4))
    t = MultiSeries.variable(2, 1, (4, 4))
    exp = series_exp(s + t)
    for i in range(5):
        for j in range(5):
            assert exp.coefficient((i, j)) == Fraction(1, math.factorial(i) * math.factorial(j))


@pytest.mark.parametrize("seed", [8, 9])
def test_log_of_product_is_sum_of_logs(seed):
    a = _random_series(seed, unit_constant=True)
    b = _random_series(seed + 30, unit_constant=True)
    assert series_log(a * b) == series_log(a) + series_log(b)


def test_mixed_moment_polynomial_matches_expansion():
    u = _random_series(11)
    v = _random_series(12)
    u = u - u.constant_term
    v = v - v.constant_term
    x = Polynomial.x()

    def linear(series, exponent):
        return Polynomial.constant(series.coefficient(exponent)) * x

    # [s1 s2] exp(uX + v) = u11 X + v11 + (u10 X + v10)(u01 X + v01)
    expected = (linear(u, (1, 1)) + v.coefficient((1, 1))
                + (linear(u, (1, 0)) + v.coefficient((1, 0))) * (linear(u, (0, 1)) + v.coefficient((0, 1))))
    assert moment_polynomials(u, v, (1, 1)).poly == expected
