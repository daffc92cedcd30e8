"""
Test Quasi-Power Lab
Families, standardization, convergence studies, moment checks and the
degenerate counterexample.
"""
from fractions import Fraction

import pytest

from quasipower.errors import CapacityError, DegenerateCovarianceError
from quasipower.schemas import GaussianSpec, QuasiPowerFamily
from quasipower.services.distribution_core import from_weights, mean_vector
from quasipower.services.quasi_power_lab import (
    binomial_distribution,
    coin_distribution,
    convergence_study,
    convolve,
    degenerate_demo,
    dissection_family,
    grammar_family,
    iid_sum_family,
    independent_axes,
    moment_check,
    product_distribution,
    product_family,
    reduce_dependent_axes,
    standardized_distribution,
)


def test_convolve_coins(coin):
    two = convolve(coin, coin)
    assert two.points == ((-2,), (0,), (2,))
    assert two.weights == (1, 2, 1)


def test_convolve_dimension_mismatch(coin, bit):
    with pytest.raises(ValueError):
        convolve(coin, product_distribution(bit, bit))


def test_binomial_weights():
    assert binomial_distribution(4).weights == (1, 4, 6, 4, 1)
    # p = 1/3: C(2, k) 1^k 2^(2-k)
    assert binomial_distribution(2, Fraction(1, 3)).weights == (4, 4, 1)


def test_product_distribution(bit):
    pair = product_distribution(bit, bit)
    assert pair.dim == 2
    assert pair.points == ((0, 0), (0, 1), (1, 0), (1, 1))


def test_iid_family_generator_and_analytic_data(coin):
    fam = iid_sum_family(coin)
    assert fam.generator(3) == convolve(convolve(coin, coin), coin)
    assert fam.phi(7) == 7
    assert fam.grad_u0 == (0,)
    assert fam.hess_u0 == ((1,),)
    assert fam.has_analytic_data


def test_iid_family_dimension_limit():
    base = from_weights({(0, 0, 0, 0): 1, (1, 1, 1, 1): 1})
    with pytest.raises(CapacityError):
        iid_sum_family(base)


def test_product_family_matches_joint_convolution(bit, coin):
    fam = product_family(bit, coin)
    joint = iid_sum_family(product_distribution(bit, coin))
    assert fam.name == "iid-product"
    assert fam.generator(5) == joint.generator(5)
    assert fam.grad_u0 == (Fraction(1, 2), 0)


def test_correlated_iid_family_hessian_matches_series():
    base = from_weights({(0, 0): 1, (1, 0): 1, (1, 1): 2})
    fam = iid_sum_family(base)
    # off-diagonal [s1 s2] u is the covariance itself
    assert fam.u.coefficient((1, 1)) == fam.hess_u0[0][1]
    assert fam.u.coefficient((2, 0)) == fam.hess_u0[0][0] / 2


def test_family_rejects_hessian_inconsistent_with_series(coin):
    fields = dict(iid_sum_family(coin))
    with pytest.raises(ValueError, match="hess_u0 is inconsistent"):
        QuasiPowerFamily(**{**fields, "hess_u0": ((2,),)})
    with pytest.raises(ValueError, match="grad_u0 is inconsistent"):
        QuasiPowerFamily(**{**fields, "grad_u0": (1,)})


def test_exact_standardization_of_coin_sum(coin):
    X, g = standardized_distribution(iid_sum_family(coin), 4, "exact")
    assert X.points == ((-2,), (-1,), (0,), (1,), (2,))
    assert g.cov == ((1.0,),)
    assert mean_vector(X) == (0,)


def test_analytic_standardization_centers_on_gradient(bit):
    X, g = standardized_distribution(iid_sum_family(bit), 16, "analytic")
    assert mean_vector(X) == (0,)
    assert g.cov == ((0.25,),)


def test_analytic_mode_needs_analytic_data(example_grammar):
    with pytest.raises(ValueError):
        standardized_distribution(grammar_family(example_grammar), 8, "analytic")


def test_analytic_mode_rejects_singular_hessian():
    fam = iid_sum_family(from_weights({(1,): 1}))
    with pytest.raises(DegenerateCovarianceError):
        standardized_distribution(fam, 4, "analytic")


def test_unknown_mode_rejected(coin):
    with pytest.raises(ValueError):
        standardized_distribution(iid_sum_family(coin), 4, "bogus")


def test_independent_axes_drops_affine_copies():
    g = GaussianSpec(dim=3, mean=(0.0,) * 3,
                     cov=((1.0, 2.0, 0.0), (2.0, 4.0, 0.0), (0.0, 0.0, 1.0)))
    assert independent_axes(g) == (1, 3)


def test_reduce_keeps_non_degenerate_reference(correlated_normal):
    d = from_weights({(0, 0): 1, (1, 0): 1, (0, 1): 1})
    _, reference, axes = reduce_dependent_axes(d, correlated_normal)
    assert axes == (1, 2)
    assert reference == correlated_normal


def test_coin_convergence_rate(coin):
    rows = convergence_study(iid_sum_family(coin), [64, 16], mode="exact")
    assert [row.n for row in rows] == [16, 64]
    assert rows[0].distance > rows[1].distance
    # lattice jump at the origin: d_n sqrt(n) tends to 1 / sqrt(2 pi)
    for row in rows:
        assert 0.3 < row.normalized < 0.5


def test_dissection_study_drops_dependent_class(triangles_and_quadrilaterals):
    rows = convergence_study(dissection_family(triangles_and_quadrilaterals), [10, 12], mode="exact")
    # r1 + 2 r2 = n - 2 ties the two class counts
    assert all(row.axes == (1,) for row in rows)
    assert all(0.0 < row.distance < 1.0 for row in rows)


def test_grammar_study_runs(example_grammar):
    rows = convergence_study(grammar_family(example_grammar), [12, 16], mode="exact")
    assert len(rows) == 2
    assert all(row.mode == "exact" for row in rows)


@pytest.mark.parametrize("k", [(1,), (2,), (3,), (4,)])
def test_coin_moments_are_exact(coin, k):
    rows = moment_check(iid_sum_family(coin), k, [4, 8, 16])
    assert all(row.abs_error == 0 for row in rows)


def test_two_dimensional_moments_are_exact(bit):
    asymmetric = from_weights({(0,): 2, (1,): 1})
    fam = product_family(bit, asymmetric)
    for k in [(1, 1), (2, 1), (1, 3), (2, 2)]:
        assert all(row.abs_error == 0 for row in moment_check(fam, k, [4, 8]))


def test_coin_second_moment_polynomial(coin):
    row = moment_check(iid_sum_family(coin), (2,), [10])[0]
    # E S_10^2 / 2! = 5
    assert row.exact == 5
    assert row.predicted == 5


def test_moment_check_needs_analytic_data(example_grammar):
    with pytest.raises(ValueError):
        moment_check(grammar_family(example_grammar), (1, 1), [4])


def test_degenerate_distance_is_one_half():
    rows = degenerate_demo([1, 10, 100, 10000])
    assert [row.n for row in rows] == [1, 10, 100, 10000]
    assert all(row.distance == Fraction(1, 2) for row in rows)


def test_degenerate_gaussian_floor_is_scale_free():
    rows = degenerate_demo([1, 4, 9])
    # +-1/sqrt(n) against N(0, 1/n) is the coin against N(0, 1): Phi(1) - 1/2
    for row in rows:
        assert row.gaussian_floor_distance == pytest.approx(0.3413447460685429, abs=1e-6)


def test_degenerate_demo_without_floor():
    assert degenerate_demo([4], gaussian_floor=False)[0].gaussian_floor_distance is None
