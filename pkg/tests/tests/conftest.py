"""
Pytest Configuration & Shared Fixtures
"""
import sys
from pathlib import Path

import pytest

ROOT_DIR = Path(__file__).resolve().parents[2]
LAB_DIR = ROOT_DIR / "lab"
if str(LAB_DIR) not in sys.path:
    sys.path.insert(0, str(LAB_DIR))

from quasipower.config import EXAMPLE_GRAMMAR
from quasipower.schemas import DissectionSpec, GaussianSpec
from quasipower.services.distribution_core import from_weights
from quasipower.services.grammar_counting import parse_grammar


def pytest_configure(config):
    config.addinivalue_line("markers", "e2e: acceptance-scale runs (slow)")


@pytest.fixture
def coin():
    """Fair coin on {-1, 1}."""
    return from_weights({(-1,): 1, (1,): 1})


@pytest.fixture
def bit():
    """Fair coin on {0, 1}."""
    return from_weights({(0,): 1, (1,): 1})


@pytest.fixture
def standard_normal():
    return GaussianSpec(dim=1, mean=(0.0,), cov=((1.0,),))


@pytest.fixture
def correlated_normal():
    """Bivariate normal with unit variances and correlation 1/2."""
    return GaussianSpec(dim=2, mean=(0.0, 0.0), cov=((1.0, 0.5), (0.5, 1.0)))


@pytest.fixture
def example_grammar():
    """S -> aSbS | bT, T -> bS | cT | a, tracking a and b."""
    return parse_grammar(EXAMPLE_GRAMMAR)


@pytest.fixture
def triangles():
    return DissectionSpec(classes=((3,),))


@pytest.fixture
def triangles_and_quadrilaterals():
    return DissectionSpec(classes=((3,), (4,)))
