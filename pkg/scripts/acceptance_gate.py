"""
Acceptance Gate: Numerical Flow
Runs the acceptance checks end to end and prints a JSON report.
Any failed check aborts with a SystemExit naming it.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np

LAB_DIR = Path(__file__).resolve().parents[1] / "lab"
if str(LAB_DIR) not in sys.path:
    sys.path.insert(0, str(LAB_DIR))

from quasipower.config import EXAMPLE_GRAMMAR  # noqa: E402
from quasipower.schemas import DissectionSpec, GaussianSpec  # noqa: E402
from quasipower.services.berry_esseen import verify_inequality  # noqa: E402
from quasipower.services.dissection_model import dissection_counts, enumerate_dissections  # noqa: E402
from quasipower.services.distribution_core import from_weights, gaussian_cdf  # noqa: E402
from quasipower.services.grammar_counting import count_words, enumerate_words, parse_grammar  # noqa: E402
from quasipower.services.lambda_operator import EvaluableFunction, lambda_eval  # noqa: E402
from quasipower.services.partition_lattice import (  # noqa: E402
    bell_number,
    enumerate_partitions,
    fubini,
    mobius_coefficient,
)
from quasipower.services.quasi_power_lab import (  # noqa: E402
    coin_distribution,
    convergence_study,
    degenerate_demo,
    dissection_family,
    grammar_family,
    moment_check,
    product_family,
    reduce_dependent_axes,
    standardized_distribution,
)
from scipy.special import ndtr  # noqa: E402


def require(condition: bool, message: str) -> None:
    if not condition:
        raise SystemExit(f"Gate failed: {message}")


def _random_polynomial(m: int, rng: np.random.Generator, exact: bool) -> Callable:
    """h(t) = 1 + sum a_j t_j + sum b_ij t_i t_j with random rational or float coefficients."""
    def draw():
        numerator, denominator = int(rng.integers(-9, 10)), int(rng.integers(1, 10))
        return Fraction(numerator, denominator) if exact else numerator / denominator

    linear = [draw() for _ in range(m)]
    quadratic = {(i, j): draw() for i in range(m) for j in range(i, m)}

    def h(t):
        value = 1
        for j in range(m):
            value = value + linear[j] * t[j]
        for (i, j), b in quadratic.items():
            value = value + b * t[i] * t[j]
        return value

    return h


def check_lambda(quick: bool) -> Dict[str, Any]:
    rng = np.random.default_rng(20240611)
    trials = 20 if quick else 200
    for m in (2, 3, 4, 5):
        for _ in range(trials):
            if m == 2:
                h = _random_polynomial(2, rng, exact=True)
                f = EvaluableFunction((1, 2), h)
                t = (Fraction(int(rng.integers(-5, 6)), 3), Fraction(int(rng.integers(-5, 6)), 7))
                require(lambda_eval(f, t) == h(t) - h((t[0], 0)) * h((0, t[1])), "Lambda m=2 closed form")
            h = _random_polynomial(m, rng, exact=False)
            t = list(rng.uniform(-1.0, 1.0, size=m))
            t[int(rng.integers(0, m))] = 0.0
            require(abs(lambda_eval(EvaluableFunction(range(1, m + 1), h), t)) < 1e-12, f"hyperplane m={m}")
            split = int(rng.integers(1, m))
            left, right = _random_polynomial(split, rng, False), _random_polynomial(m - split, rng, False)
            product = EvaluableFunction(range(1, m + 1), lambda s: left(s[:split]) * right(s[split:]))
            point = list(rng.uniform(-1.0, 1.0, size=m))
            require(abs(lambda_eval(product, point)) < 1e-12, f"independence m={m}")
    return {"lambda": "ok", "trials_per_m": trials}


def check_constants() -> Dict[str, Any]:
    require([bell_number(m) for m in range(1, 7)] == [1, 2, 5, 15, 52, 203], "Bell numbers")
    require([fubini(j) for j in range(1, 6)] == [1, 3, 13, 75, 541], "Fubini numbers")
    for m in range(2, 7):
        require(sum(mobius_coefficient(a) for a in enumerate_partitions(range(1, m + 1))) == 0, f"Mobius sum m={m}")
    return {"constants": "ok"}


def check_inequality(quick: bool) -> Dict[str, Any]:
    bit, coin = coin_distribution(0, 1), coin_distribution(-1, 1)
    cases = {
        "binomial_pair": (product_family(bit, bit), 36 if quick else 100),
        "coin_pair": (product_family(coin, coin), 16 if quick else 64),
        "grammar": (grammar_family(parse_grammar(EXAMPLE_GRAMMAR)), 12 if quick else 24),
    }
    T_list = (2.0, 5.0) if quick else (2.0, 5.0, 10.0)
    results = {}
    for name, (fam, n) in cases.items():
        X, g = standardized_distribution(fam, n, "exact")
        X, g, _ = reduce_dependent_axes(X, g)
        checks = verify_inequality(X, g, T_list, tol=1e-4, rel_tol=1e-6)
        require(all(c.report.quadrature_converged for c in checks), f"integral term converged for {name}")
        require(all(c.holds for c in checks), f"Berry-Esseen inequality for {name}")
        results[name] = [
            {"T": c.T, "lhs": c.lhs, "rhs": c.rhs, "quadrature_error": c.report.quadrature_error} for c in checks
        ]
    return {"inequality": results}


def check_rate(quick: bool) -> Dict[str, Any]:
    asymmetric = from_weights({(0,): 2, (1,): 1})
    studies = {
        "iid": (product_family(coin_distribution(-1, 1), asymmetric),
                [16, 36, 64] if quick else [16, 36, 64, 100, 144], 4.0, True),
        "grammar": (grammar_family(parse_grammar(EXAMPLE_GRAMMAR)),
                    [16, 24] if quick else [16, 24, 32, 40], 6.0, False),
        "dissection": (dissection_family(DissectionSpec(classes=((3,), (4,)))),
                       [10, 14] if quick else [10, 14, 18, 22], 6.0, False),
    }
    results = {}
    for name, (fam, n_list, ratio, monotone) in studies.items():
        rows = convergence_study(fam, n_list, mode="exact")
        normalized = [row.normalized for row in rows]
        require(max(normalized) / min(normalized) < ratio, f"rate ratio for {name}")
        if monotone:
            distances = [row.distance for row in rows]
            require(all(a > b for a, b in zip(distances, distances[1:])), f"monotone d_n for {name}")
        results[name] = normalized
    return {"rate": results}


def check_moments() -> Dict[str, Any]:
    asymmetric = from_weights({(0,): 2, (1,): 1})
    fam = product_family(coin_distribution(-1, 1), asymmetric)
    exponents = [(a, b) for a in range(5) for b in range(5) if 0 < a + b <= 4]
    for k in exponents:
        require(all(row.abs_error == 0 for row in moment_check(fam, k, [4, 8, 16])), f"moments k={k}")
    return {"moments": "ok", "exponents": len(exponents)}


def check_degenerate() -> Dict[str, Any]:
    rows = degenerate_demo([1, 10, 100, 10000])
    require(all(row.distance == Fraction(1, 2) for row in rows), "degenerate distance 1/2")
    return {"degenerate": "ok"}


def check_models(quick: bool) -> Dict[str, Any]:
    grammar = parse_grammar(EXAMPLE_GRAMMAR)
    depth = 10 if quick else 12
    words = enumerate_words(grammar, depth)
    for n in range(1, depth + 1):
        distinct = sum(1 for word in words if len(word) == n)
        require(sum(count_words(grammar, n).values()) == distinct, f"grammar oracle n={n}")
    require(count_words(grammar, 11).get((5, 5), 0) >= 1, "abcabababba membership")
    triangles = DissectionSpec(classes=((3,),))
    for n in range(3, 16):
        catalan = math.comb(2 * (n - 2), n - 2) // (n - 1)
        require(dissection_counts(triangles, n) == {(n - 2,): catalan}, f"Catalan n={n}")
    require(dissection_counts(DissectionSpec(classes=((3,), (4,))), 5) == {(1, 1): 5, (3, 0): 5}, "pentagon table")
    mixed = DissectionSpec(classes=((3,), (4,)))
    for n in range(3, 7 if quick else 9):
        require(dissection_counts(mixed, n) == enumerate_dissections(mixed, n), f"dissection enumeration n={n}")
    require(dissection_counts(mixed, 6) == {(0, 2): 3, (2, 1): 21, (4, 0): 14}, "hexagon table")
    return {"models": "ok"}


def check_gaussian_cdf() -> Dict[str, Any]:
    correlated = GaussianSpec(dim=2, mean=(0.0, 0.0), cov=((1.0, 0.5), (0.5, 1.0)))
    require(abs(gaussian_cdf(correlated, (0.0, 0.0), tol=1e-7) - 1.0 / 3.0) < 1e-6, "bivariate rho=0.5")
    standard = GaussianSpec(dim=1, mean=(0.0,), cov=((1.0,),))
    for z in np.linspace(-5.0, 5.0, 100):
        closed = 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
        require(abs(gaussian_cdf(standard, (z,)) - closed) < 1e-10, f"1-D CDF at {z}")
    return {"gaussian_cdf": "ok", "ndtr_origin": float(ndtr(0.0))}


def main(argv: List[str] = None) -> int:
    parser = argparse.ArgumentParser(description="Acceptance gate for the quasi-power lab")
    parser.add_argument("--quick", action="store_true", help="Reduced sizes for a fast pass")
    args = parser.parse_args(argv)

    report: Dict[str, Any] = {}
    report.update(check_constants())
    report.update(check_lambda(args.quick))
    report.update(check_gaussian_cdf())
    report.update(check_degenerate())
    report.update(check_moments())
    report.update(check_models(args.quick))
    report.update(check_rate(args.quick))
    report.update(check_inequality(args.quick))
    print(json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
