"""Boolean transition abstractions and the operations that generate them.

A limit word is a boolean square matrix over the state set: entry (s, t) says
whether the probability of going from s to t stays positive along a family of
input words.  Concatenation is boolean matrix product; iteration of an
idempotent deletes every edge that does not lead to a recurrent state.  An
extended limit word additionally remembers, in a second matrix, every edge
that is positive at finite horizons.

Rows are stored as integer bitmasks, so concatenation is a word-parallel OR
over the rows selected by each source row.  All objects in this module are
immutable and hashable; they can be shared freely between analysis tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, TypeVar


class NotIdempotentError(ValueError):
    """An operation defined only on idempotents received a non-idempotent."""


def _bool_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    out = []
    for bits in a:
        acc = 0
        while bits:
            low = bits & -bits
            acc |= b[low.bit_length() - 1]
            bits ^= low
        out.append(acc)
    return tuple(out)


@dataclass(frozen=True)
class LimitWord:
    """Boolean |Q| x |Q| matrix, one int bitmask per row.

    Monoid elements always have every row nonempty (from every state some
    state stays reachable); arbitrary boolean matrices are still allowed here
    so that products can be formed freely.  Use :meth:`rows_nonempty` where
    the invariant matters.
    """

    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        mask = (1 << n) - 1
        for r in self.rows:
            if r < 0 or r > mask:
                raise ValueError(f"row bitmask {r!r} out of range for {n} states")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "LimitWord":
        return cls(tuple(1 << i for i in range(n)))

    @classmethod
    def full(cls, n: int) -> "LimitWord":
        return cls(((1 << n) - 1,) * n)

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "LimitWord":
        rows = [0] * n
        for s, t in pairs:
            rows[s] |= 1 << t
        return cls(tuple(rows))

    def __call__(self, s: int, t: int) -> bool:
        return bool(self.rows[s] >> t & 1)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for s, bits in enumerate(self.rows):
            while bits:
                low = bits & -bits
                yield s, low.bit_length() - 1
                bits ^= low

    def rows_nonempty(self) -> bool:
        return all(self.rows)

    def __mul__(self, other: "LimitWord") -> "LimitWord":
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        return LimitWord(_bool_mul(self.rows, other.rows))

    def __pow__(self, k: int) -> "LimitWord":
        if k < 0:
            raise ValueError("negative power")
        result = LimitWord.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_idempotent(self) -> bool:
        return _bool_mul(self.rows, self.rows) == self.rows

    def idempotent_power(self) -> "LimitWord":
        """The idempotent element of the cyclic semigroup generated by self.

        Computed as the |Q|!-th power by binary exponentiation: |Q|! is a
        multiple of every recurrence period and at least the index of the
        power sequence, so this power is always idempotent.
        """
        result = self ** math.factorial(self.n)
        assert result.is_idempotent()
        return result

    def _columns(self) -> tuple[int, ...]:
        cols = [0] * self.n
        for s, bits in enumerate(self.rows):
            sbit = 1 << s
            for t in range(self.n):
                if bits >> t & 1:
                    cols[t] |= sbit
        return tuple(cols)

    def recurrent_states(self) -> frozenset[int]:
        """States s such that every state reachable from s reaches s back.

        Defined only on idempotents; for an idempotent, the set is nonempty.
        """
        if not self.is_idempotent():
            raise NotIdempotentError("recurrence is defined on idempotents only")
        cols = self._columns()
        return frozenset(
            s for s in range(self.n) if self.rows[s] & ~cols[s] == 0
        )

    def iterate(self) -> "LimitWord":
        """Drop every edge whose target is not recurrent (the sharp operation)."""
        if not self.is_idempotent():
            raise NotIdempotentError("iteration is defined on idempotents only")
        rec_mask = 0
        for s in self.recurrent_states():
            rec_mask |= 1 << s
        rows = tuple(r & rec_mask for r in self.rows)
        return LimitWord(rows)

    def cl_count(self) -> int:
        """Number of mutual-reachability classes among self-related states.

        For an idempotent u this is the count of equivalence classes of the
        relation s ~ t iff u(s,t) = u(t,s) = 1, restricted to states with
        u(s,s) = 1.  It never exceeds |Q| and strictly shrinks under a
        non-trivial iteration.
        """
        if not self.is_idempotent():
            raise NotIdempotentError("class counting is defined on idempotents only")
        cols = self._columns()
        classes = set()
        for s in range(self.n):
            if self.rows[s] >> s & 1:
                classes.add(self.rows[s] & cols[s])
        return len(classes)

    def __str__(self) -> str:
        return "/".join(
            "".join("1" if r >> t & 1 else "0" for t in range(self.n))
            for r in self.rows
        )


@dataclass(frozen=True)
class ExtendedLimitWord:
    """Pair (word, word_plus): the asymptotic support and the finite-horizon one.

    Invariant: word is pointwise below word_plus.
    """

    word: LimitWord
    plus: LimitWord

    def __post_init__(self) -> None:
        if self.word.n != self.plus.n:
            raise ValueError("component dimension mismatch")
        for r, p in zip(self.word.rows, self.plus.rows):
            if r & ~p:
                raise ValueError("first component must be pointwise <= second")

    @property
    def n(self) -> int:
        return self.word.n

    @classmethod
    def identity(cls, n: int) -> "ExtendedLimitWord":
        one = LimitWord.identity(n)
        return cls(one, one)

    @classmethod
    def of(cls, word: LimitWord) -> "ExtendedLimitWord":
        return cls(word, word)

    def __mul__(self, other: "ExtendedLimitWord") -> "ExtendedLimitWord":
        return ExtendedLimitWord(self.word * other.word, self.plus * other.plus)

    def is_idempotent(self) -> bool:
        return self.word.is_idempotent() and self.plus.is_idempotent()

    def iterate(self) -> "ExtendedLimitWord":
        """Sharp on the first component; the second component is untouched."""
        if not self.is_idempotent():
            raise NotIdempotentError(
                "iteration of an extended limit word needs component-wise idempotency"
            )
        return ExtendedLimitWord(self.word.iterate(), self.plus)

    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return (self.word.rows, self.plus.rows)


# ---------------------------------------------------------------------------
# Derivation trees
# ---------------------------------------------------------------------------

EPSILON = None


@dataclass(frozen=True)
class DerivationTree:
    """Provenance of a monoid element.

    kind is "leaf" (a letter, or the empty word when letter is None),
    "concat" (two children) or "iterate" (one child, which must derive an
    idempotent).  size counts nodes; sharp_height counts nested iterations:
    0 for leaves, max of children for concatenation, child + 1 for iteration.
    """

    kind: str
    letter: str | None = None
    left: "DerivationTree | None" = None
    right: "DerivationTree | None" = None
    child: "DerivationTree | None" = None
    size: int = 1
    sharp_height: int = 0

    @classmethod
    def leaf(cls, letter: str | None) -> "DerivationTree":
        return cls(kind="leaf", letter=letter)

    @classmethod
    def concat(cls, left: "DerivationTree", right: "DerivationTree") -> "DerivationTree":
        return cls(
            kind="concat",
            left=left,
            right=right,
            size=left.size + right.size + 1,
            sharp_height=max(left.sharp_height, right.sharp_height),
        )

    @classmethod
    def iterate(cls, child: "DerivationTree") -> "DerivationTree":
        return cls(
            kind="iterate",
            child=child,
            size=child.size + 1,
            sharp_height=child.sharp_height + 1,
        )

    def expression(self) -> str:
        if self.kind == "leaf":
            return "eps" if self.letter is None else self.letter
        if self.kind == "concat":
            return f"concat({self.left.expression()},{self.right.expression()})"
        return f"iter({self.child.expression()})"

    def word_length(self, n: int) -> int:
        """Length of the concrete word this tree denotes at pump index n."""
        if self.kind == "leaf":
            return 0 if self.letter is None else 1
        if self.kind == "concat":
            return self.left.word_length(n) + self.right.word_length(n)
        return n * self.child.word_length(n)

    def letters(self, n: int) -> Iterator[str]:
        """Stream the word at pump index n: iteration repeats its child n times."""
        if self.kind == "leaf":
            if self.letter is not None:
                yield self.letter
        elif self.kind == "concat":
            yield from self.left.letters(n)
            yield from self.right.letters(n)
        else:
            for _ in range(n):
                yield from self.child.letters(n)


T = TypeVar("T")


def evaluate_tree(
    tree: DerivationTree,
    letters: Mapping[str, T],
    identity: T,
) -> T:
    """Evaluate a derivation tree over any carrier with * and .iterate()."""
    if tree.kind == "leaf":
        if tree.letter is None:
            return identity
        try:
            return letters[tree.letter]
        except KeyError:
            raise ValueError(f"unknown letter {tree.letter!r} in expression") from None
    if tree.kind == "concat":
        return evaluate_tree(tree.left, letters, identity) * evaluate_tree(
            tree.right, letters, identity
        )
    return evaluate_tree(tree.child, letters, identity).iterate()


def parse_expression(text: str) -> DerivationTree:
    """Parse the round-trippable witness grammar.

    expr := "iter" "(" expr ")" | "concat" "(" expr "," expr ")"
          | "eps" | LETTER
    """
    tokens = _tokenize_expression(text)
    pos = 0

    def parse() -> DerivationTree:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "iter":
            _expect("(")
            inner = parse()
            _expect(")")
            return DerivationTree.iterate(inner)
        if tok == "concat":
            _expect("(")
            left = parse()
            _expect(",")
            right = parse()
            _expect(")")
            return DerivationTree.concat(left, right)
        if tok in "(),":
            raise ValueError(f"unexpected {tok!r} in expression")
        if tok == "eps":
            return DerivationTree.leaf(None)
        return DerivationTree.leaf(tok)

    def _expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            found = tokens[pos] if pos < len(tokens) else "end of input"
            raise ValueError(f"expected {tok!r}, found {found!r}")
        pos += 1

    tree = parse()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in expression: {tokens[pos:]}")
    return tree


def _tokenize_expression(text: str) -> list[str]:
    tokens = []
    word = []
    for ch in text:
        if ch in "(),":
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
