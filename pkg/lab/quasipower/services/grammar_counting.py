"""
Grammar Counting Service
Exact joint counts of words of a context-free language by length and by the
number of occurrences of each tracked terminal.
"""
import sys
import warnings
from collections import Counter, deque
from typing import Dict, List, Optional, Tuple

from quasipower.config import ENUMERATION_CERTIFY_DEPTH, GRAMMAR_LENGTH_CAP
from quasipower.errors import CapacityError, EmptySupportError, GrammarParseError
from quasipower.schemas import Grammar, GrammarRule, LatticeDistribution
from quasipower.services.distribution_core import from_weights

Counts = Dict[Tuple[int, ...], int]

_HEADERS = ("terminals", "nonterminals", "start", "track")


def parse_grammar(text: str) -> Grammar:
    """
    Parses the grammar file format.

    Format:
        terminals: a b c
        nonterminals: S T
        start: S
        track: a b          (optional; defaults to every terminal)
        S -> a S b S        (one rule per line)

    '#' starts a comment. Duplicate rules are dropped with a warning.

    Raises:
        GrammarParseError: With the offending line number where one applies.
    """
    headers: Dict[str, List[str]] = {}
    rules: List[Tuple[int, GrammarRule]] = []
    seen = set()
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" in line:
            lhs, _, rhs = line.partition("->")
            lhs_symbols = lhs.split()
            if len(lhs_symbols) != 1:
                raise GrammarParseError("rule needs exactly one symbol on the left", line_number)
            rhs_symbols = tuple(rhs.split())
            if not rhs_symbols:
                raise GrammarParseError(f"rule for '{lhs_symbols[0]}' has an empty right side", line_number)
            rule = GrammarRule(lhs=lhs_symbols[0], rhs=rhs_symbols)
            if rule in seen:
                warnings.warn(f"line {line_number}: duplicate rule {line} ignored", UserWarning, stacklevel=2)
                continue
            seen.add(rule)
            rules.append((line_number, rule))
            continue
        key, colon, value = line.partition(":")
        key = key.strip().lower()
        if not colon or key not in _HEADERS:
            raise GrammarParseError(f"unrecognized line '{line}'", line_number)
        if key in headers:
            raise GrammarParseError(f"'{key}' declared twice", line_number)
        headers[key] = value.split()

    for key in ("terminals", "nonterminals", "start"):
        if key not in headers:
            raise GrammarParseError(f"missing '{key}:' declaration")
    if len(headers["start"]) != 1:
        raise GrammarParseError("exactly one start symbol is required")
    terminals, nonterminals = headers["terminals"], headers["nonterminals"]

    for line_number, rule in rules:
        if rule.lhs not in nonterminals:
            raise GrammarParseError(f"left side '{rule.lhs}' is not a declared nonterminal", line_number)
        for symbol in rule.rhs:
            if symbol not in terminals and symbol not in nonterminals:
                raise GrammarParseError(f"undeclared symbol '{symbol}'", line_number)
        if not any(symbol in terminals for symbol in rule.rhs):
            raise GrammarParseError(
                f"rule {rule.lhs} -> {' '.join(rule.rhs)} has no terminal on the right side", line_number
            )

    try:
        return Grammar(
            terminals=tuple(terminals),
            nonterminals=tuple(nonterminals),
            start=headers["start"][0],
            rules=tuple(rule for _, rule in rules),
            tracked=tuple(headers.get("track", terminals)),
        )
    except ValueError as exc:
        raise GrammarParseError(str(exc)) from exc


def _convolve(a: Counts, b: Counts) -> Counts:
    result: Counts = {}
    for x, count_x in a.items():
        for y, count_y in b.items():
            key = tuple(i + j for i, j in zip(x, y))
            result[key] = result.get(key, 0) + count_x * count_y
    return result


def _accumulate(target: Counts, source: Counts) -> None:
    for key, count in source.items():
        target[key] = target.get(key, 0) + count


class CountTable:
    """
    Counts of leftmost derivations per (nonterminal, length, tracked-count vector).

    Every right side is expanded symbol by symbol (suffix tables), which is
    the binarized form of the rule. Each symbol derives words of length >= 1,
    so a nonterminal's level n only reads levels < n.
    """

    def __init__(self, grammar: Grammar):
        self.grammar = grammar
        self.terminals = set(grammar.terminals)
        self.axis = {symbol: i for i, symbol in enumerate(grammar.tracked)}
        self.zero = (0,) * len(grammar.tracked)
        self.levels: Dict[str, List[Counts]] = {a: [{}] for a in grammar.nonterminals}
        self._suffix: Dict[Tuple[int, int, int], Counts] = {}

    @property
    def max_length(self) -> int:
        return len(self.levels[self.grammar.start]) - 1

    def _terminal_vector(self, symbol: str) -> Tuple[int, ...]:
        vector = list(self.zero)
        if symbol in self.axis:
            vector[self.axis[symbol]] = 1
        return tuple(vector)

    def _suffix_counts(self, rule_index: int, position: int, n: int) -> Counts:
        """Counts for rhs[position:] deriving a word of length n."""
        rhs = self.grammar.rules[rule_index].rhs
        remaining = len(rhs) - position
        if remaining == 0:
            return {self.zero: 1} if n == 0 else {}
        if n < remaining:
            return {}
        key = (rule_index, position, n)
        if key in self._suffix:
            return self._suffix[key]
        symbol = rhs[position]
        if symbol in self.terminals:
            shift = self._terminal_vector(symbol)
            result = {
                tuple(i + j for i, j in zip(x, shift)): count
                for x, count in self._suffix_counts(rule_index, position + 1, n - 1).items()
            }
        else:
            result = {}
            for length in range(1, n - (remaining - 1) + 1):
                head = self.levels[symbol][length]
                if not head:
                    continue
                tail = self._suffix_counts(rule_index, position + 1, n - length)
                if tail:
                    _accumulate(result, _convolve(head, tail))
        self._suffix[key] = result
        return result

    def extend(self, n: int) -> None:
        """Computes all levels up to n."""
        for length in range(self.max_length + 1, n + 1):
            fresh: Dict[str, Counts] = {a: {} for a in self.grammar.nonterminals}
            # a rule's suffix tables at this length only read nonterminal levels < length
            for index, rule in enumerate(self.grammar.rules):
                _accumulate(fresh[rule.lhs], self._suffix_counts(index, 0, length))
            for symbol, counts in fresh.items():
                self.levels[symbol].append(counts)

    def at(self, symbol: str, n: int) -> Counts:
        self.extend(n)
        return dict(self.levels[symbol][n])


def count_words(g: Grammar, n: int, cap: int = GRAMMAR_LENGTH_CAP, table: Optional[CountTable] = None) -> Counts:
    """
    Joint counts of derivations of words of length n from the start symbol.

    Args:
        g: Grammar.
        n: Word length, 1 <= n <= cap.
        cap: Length cap.
        table: Reusable CountTable for the same grammar.

    Returns:
        Mapping tracked-count vector -> count (zero counts omitted).

    Raises:
        ValueError: If n < 1.
        CapacityError: If n > cap.
    """
    if n < 1:
        raise ValueError(f"word length must be at least 1, got {n}")
    if n > cap:
        raise CapacityError(f"word length {n} exceeds the grammar length cap {cap}")
    table = table or CountTable(g)
    if table.max_length < n:
        print(f"[Grammar] counting derivations up to length {n}", file=sys.stderr)
    return table.at(g.start, n)


def grammar_distribution(g: Grammar, n: int, cap: int = GRAMMAR_LENGTH_CAP,
                         table: Optional[CountTable] = None) -> LatticeDistribution:
    """
    Distribution of tracked-symbol counts over the words of length n.

    Raises:
        EmptySupportError: If the language has no words of length n.
    """
    if not g.tracked:
        raise ValueError("grammar tracks no terminals")
    counts = count_words(g, n, cap, table)
    if not counts:
        raise EmptySupportError(f"the language has no words of length {n}")
    return from_weights(counts)


def enumerate_words(g: Grammar, max_len: int) -> Counter:
    """
    Breadth-first leftmost derivations of every word of length <= max_len.

    Returns:
        Counter word (tuple of terminals) -> number of leftmost derivations.
    """
    terminals = set(g.terminals)
    rules_by_lhs: Dict[str, List[Tuple[str, ...]]] = {}
    for rule in g.rules:
        rules_by_lhs.setdefault(rule.lhs, []).append(rule.rhs)
    words: Counter = Counter()
    queue = deque([(g.start,)])
    while queue:
        form = queue.popleft()
        leftmost = next((i for i, symbol in enumerate(form) if symbol not in terminals), None)
        if leftmost is None:
            words[form] += 1
            continue
        for rhs in rules_by_lhs.get(form[leftmost], []):
            expanded = form[:leftmost] + rhs + form[leftmost + 1:]
            # every symbol derives at least one terminal
            if len(expanded) <= max_len:
                queue.append(expanded)
    return words


def certify_unambiguity(g: Grammar, depth: int = ENUMERATION_CERTIFY_DEPTH) -> bool:
    """
    True if, for every length up to depth, the derivation counts equal the
    number of distinct words (no word has two leftmost derivations).
    """
    words = enumerate_words(g, depth)
    if any(count > 1 for count in words.values()):
        return False
    table = CountTable(g)
    distinct = Counter(len(word) for word in words)
    for n in range(1, depth + 1):
        if sum(table.at(g.start, n).values()) != distinct.get(n, 0):
            return False
    return True
