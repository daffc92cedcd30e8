"""
Test Core Configuration & Errors
Tests the Brain: config constants, output templates and the error hierarchy.
"""
import pytest

from quasipower.config import (
    DEFAULT_T_SWEEP,
    EXAMPLE_GRAMMAR,
    EXIT_CAPACITY,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_USAGE,
    MAX_GAUSSIAN_CDF_DIM,
    MAX_QUADRATURE_DIM,
    get_columns,
)
from quasipower.errors import (
    CapacityError,
    GrammarParseError,
    InsufficientOrderError,
    LabError,
    QuadratureNonConvergence,
)
from quasipower.services.grammar_counting import parse_grammar


def test_exit_codes_are_distinct():
    assert len({EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_NONCONVERGENCE}) == 4
    assert EXIT_OK == 0


def test_dimension_limits():
    assert MAX_QUADRATURE_DIM == 3
    assert MAX_GAUSSIAN_CDF_DIM == 3


def test_default_sweep_is_increasing():
    assert list(DEFAULT_T_SWEEP) == sorted(DEFAULT_T_SWEEP)
    assert all(T > 0 for T in DEFAULT_T_SWEEP)


def test_example_grammar_parses():
    grammar = parse_grammar(EXAMPLE_GRAMMAR)
    assert grammar.nonterminals == ("S", "T")


def test_get_columns_fixed_template():
    assert get_columns("bound") == ["T", "integral", "marginal", "smoothing", "rhs", "lhs", "holds"]


def test_get_columns_expands_axes():
    assert get_columns("dissection_counts", ["r1", "r2"]) == ["n", "r1", "r2", "count"]


def test_get_columns_unknown_kind():
    with pytest.raises(KeyError, match="not found"):
        get_columns("nope")


def test_errors_are_value_errors():
    assert issubclass(CapacityError, ValueError)
    assert issubclass(InsufficientOrderError, LabError)
    assert issubclass(QuadratureNonConvergence, RuntimeWarning)


def test_grammar_error_prefixes_line_number():
    error = GrammarParseError("bad rule", line_number=7)
    assert str(error) == "line 7: bad rule"
    assert error.line_number == 7
    assert str(GrammarParseError("no line")) == "no line"
