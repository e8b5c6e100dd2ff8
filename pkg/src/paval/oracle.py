"""Quantitative cross-validation of algebraic verdicts on concrete words.

Words are streamed letter by letter and never materialized; the distribution
vector is updated in place.  Evaluation is exact (rationals) up to a length
threshold and switches to double precision with compensated summation beyond
it.  The float path renormalizes defensively: if the vector sum ever drifts
from 1 by more than 1e-9 the evaluation is redone exactly (or refused when
the word exceeds the exact budget).
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

from .automaton import AutomatonError, ProbAutomaton, ZERO
from .limitwords import DerivationTree
from .monoid import WitnessReport

EXACT_LENGTH_LIMIT = 10**6
WORD_LENGTH_CAP = 2**26
FLOAT_DRIFT_LIMIT = 1e-9


class WordBudgetError(RuntimeError):
    """A word grew past the streaming evaluation cap (nested pumping explodes)."""


class _FloatDrift(Exception):
    pass


@dataclass(frozen=True)
class WordFamily:
    """Indexed family of finite words over an automaton's alphabet.

    `generate(n)` streams the letters of the n-th word; `length(n)` gives its
    length without generating it.
    """

    description: str
    generate: Callable[[int], Iterable[str]]
    length: Callable[[int], int]

    @classmethod
    def from_tree(cls, tree: DerivationTree) -> "WordFamily":
        return cls(
            description=tree.expression(),
            generate=tree.letters,
            length=tree.word_length,
        )

    @classmethod
    def from_text(cls, text: str) -> "WordFamily":
        return parse_family(text)


@dataclass(frozen=True)
class ProbeSample:
    n: int
    word_length: int
    value: Fraction | float
    mode: str  # "exact" | "float"


@dataclass(frozen=True)
class ConvergenceProbe:
    """Acceptance samples of a word family at increasing pump indices.

    verdict is "converges_to_1" only when the last sample clears
    1 - tolerance; otherwise "inconclusive" (never a negative claim).
    """

    description: str
    tolerance: float
    samples: tuple[ProbeSample, ...]

    def __post_init__(self) -> None:
        for s in self.samples:
            if not 0 <= s.value <= 1:
                raise ValueError(f"acceptance {s.value} outside [0, 1]")

    @property
    def final_value(self) -> Fraction | float:
        return self.samples[-1].value

    @property
    def verdict(self) -> str:
        if self.samples and self.final_value >= 1 - self.tolerance:
            return "converges_to_1"
        return "inconclusive"

    @property
    def converges(self) -> bool:
        return self.verdict == "converges_to_1"

    @property
    def strictly_increasing(self) -> bool:
        values = [s.value for s in self.samples]
        return all(b > a for a, b in zip(values, values[1:]))

    def csv_lines(self) -> list[str]:
        out = ["n,word_length,acceptance,mode"]
        for s in self.samples:
            out.append(f"{s.n},{s.word_length},{float(s.value):.12g},{s.mode}")
        return out


# ---------------------------------------------------------------------------
# Word evaluation
# ---------------------------------------------------------------------------


def evaluate_word(
    aut: ProbAutomaton,
    letters: Iterable[str],
    mode: str = "auto",
    length: int | None = None,
) -> tuple[Fraction | float, str]:
    """Acceptance probability of a streamed word; returns (value, mode used).

    mode "auto" evaluates exactly up to EXACT_LENGTH_LIMIT letters and in
    double precision beyond; "exact" and "float" force a path.  Exact
    evaluation refuses words past the exact limit, float evaluation refuses
    words past WORD_LENGTH_CAP.
    """
    if mode not in ("auto", "exact", "float"):
        raise ValueError(f"unknown evaluation mode {mode!r}")
    if length is not None and length > WORD_LENGTH_CAP:
        raise WordBudgetError(
            f"word length {length} exceeds the streaming cap {WORD_LENGTH_CAP}"
        )
    if mode == "auto":
        if length is None:
            letters = list(letters)
            length = len(letters)
        mode = "exact" if length <= EXACT_LENGTH_LIMIT else "float"
    if mode == "exact":
        if length is not None and length > EXACT_LENGTH_LIMIT:
            raise WordBudgetError(
                f"word length {length} exceeds the exact budget {EXACT_LENGTH_LIMIT}"
            )
        return _evaluate_exact(aut, letters), "exact"
    try:
        return _evaluate_float(aut, letters), "float"
    except _FloatDrift:
        if length is not None and length > EXACT_LENGTH_LIMIT:
            raise WordBudgetError(
                "float evaluation drifted and the word exceeds the exact budget"
            ) from None
        return _evaluate_exact(aut, letters), "exact"


def _evaluate_exact(aut: ProbAutomaton, letters: Iterable[str]) -> Fraction:
    n = aut.n
    matrices = {a: aut.letter_matrix(a).rows for a in aut.alphabet}
    v = list(aut.initial.weights)
    budget = EXACT_LENGTH_LIMIT
    for a in letters:
        rows = matrices.get(a)
        if rows is None:
            raise AutomatonError(f"unknown letter {a!r}")
        out = [ZERO] * n
        for s in range(n):
            w = v[s]
            if w:
                row = rows[s]
                for t in range(n):
                    if row[t]:
                        out[t] += w * row[t]
        v = out
        budget -= 1
        if budget < 0:
            raise WordBudgetError(
                f"word exceeds the exact evaluation budget {EXACT_LENGTH_LIMIT}"
            )
    value = sum((v[t] for t in aut.final), ZERO)
    assert 0 <= value <= 1 and sum(v) == 1
    return value


def _evaluate_float(aut: ProbAutomaton, letters: Iterable[str]) -> float:
    n = aut.n
    # Transposed float matrices: one tuple of source weights per target state.
    columns = {
        a: tuple(
            tuple(float(aut.letter_matrix(a).rows[s][t]) for s in range(n))
            for t in range(n)
        )
        for a in aut.alphabet
    }
    fsum = math.fsum
    mul = operator.mul
    v = tuple(float(w) for w in aut.initial.weights)
    remaining = WORD_LENGTH_CAP
    for a in letters:
        cols = columns.get(a)
        if cols is None:
            raise AutomatonError(f"unknown letter {a!r}")
        v = tuple(fsum(map(mul, v, col)) for col in cols)
        if abs(fsum(v) - 1.0) > FLOAT_DRIFT_LIMIT:
            raise _FloatDrift()
        remaining -= 1
        if remaining < 0:
            raise WordBudgetError(
                f"word exceeds the streaming cap {WORD_LENGTH_CAP}"
            )
    value = fsum(v[t] for t in sorted(aut.final))
    return min(max(value, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


def eval_family(
    aut: ProbAutomaton,
    family: WordFamily,
    ns: Sequence[int],
    mode: str = "auto",
    tolerance: float = 1e-3,
) -> ConvergenceProbe:
    """Evaluate the family at the given pump indices."""
    samples = []
    for n in ns:
        length = family.length(n)
        value, used = evaluate_word(aut, family.generate(n), mode=mode, length=length)
        samples.append(ProbeSample(n=n, word_length=length, value=value, mode=used))
    return ConvergenceProbe(
        description=family.description,
        tolerance=tolerance,
        samples=tuple(samples),
    )


def probe_value1(
    aut: ProbAutomaton,
    witness: WitnessReport,
    n_max: int = 16,
    tolerance: float = 1e-3,
    mode: str = "auto",
) -> ConvergenceProbe:
    """Pump the witness derivation and watch the acceptance climb.

    Words are synthesized from the witness tree (iteration nodes repeat their
    child n times) for n = 1..n_max.  A witness whose word families stall
    yields "inconclusive", never a negative verdict; raising n_max is the
    remedy.
    """
    if witness.kind != "value1":
        raise ValueError("probe needs a value-1 witness")
    family = WordFamily.from_tree(witness.trees[0])
    return eval_family(
        aut, family, range(1, n_max + 1), mode=mode, tolerance=tolerance
    )


def synthesize_word(tree: DerivationTree, n: int) -> list[str]:
    """The concrete word a derivation denotes at pump index n."""
    return list(tree.letters(n))


def min_transition_probability(aut: ProbAutomaton) -> Fraction:
    """Smallest positive entry over all letter matrices."""
    best: Fraction | None = None
    for m in aut.matrices:
        for row in m.rows:
            for w in row:
                if w > 0 and (best is None or w < best):
                    best = w
    return best


# ---------------------------------------------------------------------------
# Family expressions
# ---------------------------------------------------------------------------
#
# Grammar (whitespace separates adjacent letters):
#     family := item+
#     item   := atom [ "^" exponent ]
#     atom   := LETTER | "(" family ")"
#     exponent := INT | "n" | INT "^" "n" | "(" exponent ")"
#
# Example: "(b a^n)^(2^n) b" is the word (b a^n) repeated 2^n times, then b.


@dataclass(frozen=True)
class _Exponent:
    base: int | None  # None means the exponent is n itself or a constant
    constant: int | None

    def value(self, n: int) -> int:
        if self.base is not None:
            return self.base**n
        if self.constant is not None:
            return self.constant
        return n


@dataclass(frozen=True)
class _Node:
    kind: str  # "letter" | "seq" | "power"
    letter: str | None = None
    children: tuple = ()
    exponent: _Exponent | None = None

    def length(self, n: int) -> int:
        if self.kind == "letter":
            return 1
        if self.kind == "seq":
            return sum(c.length(n) for c in self.children)
        return self.exponent.value(n) * self.children[0].length(n)

    def letters(self, n: int) -> Iterator[str]:
        if self.kind == "letter":
            yield self.letter
        elif self.kind == "seq":
            for c in self.children:
                yield from c.letters(n)
        else:
            for _ in range(self.exponent.value(n)):
                yield from self.children[0].letters(n)


def parse_family(text: str) -> WordFamily:
    """Parse a pumping-family expression such as "(b a^n)^(2^n) b"."""
    tokens = _family_tokens(text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_seq(stop: str | None) -> _Node:
        items = []
        while peek() is not None and peek() != stop:
            items.append(parse_item())
        if not items:
            raise ValueError("empty family expression")
        if len(items) == 1:
            return items[0]
        return _Node(kind="seq", children=tuple(items))

    def parse_item() -> _Node:
        tok = take()
        if tok == "(":
            atom = parse_seq(")")
            if peek() != ")":
                raise ValueError("unbalanced parenthesis in family")
            take()
        elif tok in (")", "^"):
            raise ValueError(f"unexpected {tok!r} in family")
        else:
            atom = _Node(kind="letter", letter=tok)
        if peek() == "^":
            take()
            return _Node(kind="power", children=(atom,), exponent=parse_exponent())
        return atom

    def parse_exponent() -> _Exponent:
        tok = take()
        if tok == "(":
            exp = parse_exponent()
            if peek() != ")":
                raise ValueError("unbalanced parenthesis in exponent")
            take()
            return exp
        if tok == "n":
            return _Exponent(base=None, constant=None)
        if tok.isdigit():
            if peek() == "^":
                take()
                if take() != "n":
                    raise ValueError("only INT^n exponents are supported")
                return _Exponent(base=int(tok), constant=None)
            return _Exponent(base=None, constant=int(tok))
        raise ValueError(f"bad exponent token {tok!r}")

    node = parse_seq(None)
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in family: {tokens[pos:]}")
    return WordFamily(
        description=text.strip(),
        generate=node.letters,
        length=node.length,
    )


def _family_tokens(text: str) -> list[str]:
    tokens = []
    word: list[str] = []
    for ch in text:
        if ch in "()^":
            if word:
                tokens.append("".join(word))
                word = []
            tokens.append(ch)
        elif ch.isspace():
            if word:
                tokens.append("".join(word))
                word = []
        else:
            word.append(ch)
    if word:
        tokens.append("".join(word))
    return tokens
