"""
Test Grammar Counting
"""
import pytest

from quasipower.errors import CapacityError, EmptySupportError, GrammarParseError
from quasipower.services.grammar_counting import (
    CountTable,
    certify_unambiguity,
    count_words,
    enumerate_words,
    grammar_distribution,
    parse_grammar,
)

DYCK = """
terminals: ( )
nonterminals: D
start: D
D -> ( )
D -> ( D )
D -> ( ) D
D -> ( D ) D
"""


def test_parses_example_grammar(example_grammar):
    assert example_grammar.start == "S"
    assert example_grammar.tracked == ("a", "b")
    assert len(example_grammar.rules) == 5


def test_track_defaults_to_all_terminals():
    grammar = parse_grammar(DYCK)
    assert grammar.tracked == ("(", ")")


def test_small_lengths_by_hand(example_grammar):
    assert count_words(example_grammar, 1) == {}
    assert count_words(example_grammar, 2) == {(1, 1): 1}          # ba
    assert count_words(example_grammar, 3) == {(1, 1): 1}          # bca
    assert count_words(example_grammar, 4) == {(1, 1): 1, (1, 3): 1}  # bcca, bbba


def test_counts_match_enumeration(example_grammar):
    words = enumerate_words(example_grammar, 10)
    table = CountTable(example_grammar)
    for n in range(1, 11):
        expected = {}
        for word, derivations in words.items():
            if len(word) == n:
                key = (word.count("a"), word.count("b"))
                expected[key] = expected.get(key, 0) + derivations
        assert count_words(example_grammar, n, table=table) == expected


def test_known_word_is_counted(example_grammar):
    word = tuple("abcabababba")
    assert enumerate_words(example_grammar, 11)[word] == 1
    assert count_words(example_grammar, 11).get((5, 5), 0) >= 1


def test_example_grammar_is_unambiguous(example_grammar):
    assert certify_unambiguity(example_grammar, 10)


def test_ambiguous_grammar_is_not_certified():
    grammar = parse_grammar("""
terminals: a
nonterminals: S
start: S
S -> a
S -> S S a
S -> a S S
""")
    assert not certify_unambiguity(grammar, 6)


def test_dyck_counts_are_catalan():
    grammar = parse_grammar(DYCK)
    catalan = [1, 2, 5, 14, 42]
    for pairs, expected in zip(range(1, 6), catalan):
        assert count_words(grammar, 2 * pairs) == {(pairs, pairs): expected}
        assert count_words(grammar, 2 * pairs - 1) == {}


def test_distribution_normalizes_counts(example_grammar):
    d = grammar_distribution(example_grammar, 4)
    assert d.points == ((1, 1), (1, 3))
    assert d.weights == (1, 1)


def test_empty_length_raises(example_grammar):
    with pytest.raises(EmptySupportError):
        grammar_distribution(example_grammar, 1)


def test_length_cap(example_grammar):
    with pytest.raises(CapacityError):
        count_words(example_grammar, 41)
    with pytest.raises(ValueError):
        count_words(example_grammar, 0)


def test_undeclared_symbol_reports_line():
    with pytest.raises(GrammarParseError, match="line 5"):
        parse_grammar("terminals: a\nnonterminals: S\nstart: S\nS -> a\nS -> a X\n")


def test_rule_without_terminal_rejected():
    with pytest.raises(GrammarParseError, match="no terminal"):
        parse_grammar("terminals: a\nnonterminals: S\nstart: S\nS -> a\nS -> S S\n")


def test_unknown_line_rejected():
    with pytest.raises(GrammarParseError, match="line 2"):
        parse_grammar("terminals: a\nwhatever\n")


def test_missing_start_rejected():
    with pytest.raises(GrammarParseError):
        parse_grammar("terminals: a\nnonterminals: S\nS -> a\n")


def test_untracked_terminal_is_not_counted():
    grammar = parse_grammar("terminals: a b\nnonterminals: S\nstart: S\ntrack: b\nS -> a\nS -> a b S\n")
    assert count_words(grammar, 3) == {(1,): 1}


def test_duplicate_rule_warns_and_is_dropped():
    with pytest.warns(UserWarning, match="duplicate"):
        grammar = parse_grammar("terminals: a\nnonterminals: S\nstart: S\nS -> a\nS -> a\n")
    assert len(grammar.rules) == 1
