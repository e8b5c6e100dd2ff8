"""Probabilistic automata with exact rational transitions.

All probability arithmetic here is exact (`fractions.Fraction`); floating
point only ever appears in the empirical oracle's convergence probes.  Every
object is an immutable value after construction and safe to share across
concurrent analysis tasks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .limitwords import LimitWord

RationalLike = Fraction | int | str

ZERO = Fraction(0)
ONE = Fraction(1)


class AutomatonError(ValueError):
    """Invalid automaton structure or invalid use of one."""


def as_fraction(value: RationalLike) -> Fraction:
    f = Fraction(value)
    return f


@dataclass(frozen=True)
class Distribution:
    """Exact probability vector over the states 0..n-1; sums to exactly 1."""

    weights: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        total = ZERO
        for w in self.weights:
            if w < 0 or w > 1:
                raise AutomatonError(f"weight {w} outside [0, 1]")
            total += w
        if total != 1:
            raise AutomatonError(f"distribution sums to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.weights)

    @classmethod
    def point(cls, n: int, state: int) -> "Distribution":
        return cls(tuple(ONE if i == state else ZERO for i in range(n)))

    @classmethod
    def uniform(cls, n: int, states: Iterable[int]) -> "Distribution":
        chosen = sorted(set(states))
        if not chosen:
            raise AutomatonError("uniform distribution over an empty set")
        w = Fraction(1, len(chosen))
        weights = [ZERO] * n
        for s in chosen:
            weights[s] = w
        return cls(tuple(weights))

    @classmethod
    def from_pairs(cls, n: int, pairs: Mapping[int, RationalLike]) -> "Distribution":
        weights = [ZERO] * n
        for s, w in pairs.items():
            weights[s] += as_fraction(w)
        return cls(tuple(weights))

    def support(self) -> tuple[int, ...]:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)

    def __getitem__(self, state: int) -> Fraction:
        return self.weights[state]

    def scaled(self, factor: Fraction) -> tuple[Fraction, ...]:
        return tuple(w * factor for w in self.weights)


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix of exact rationals."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        for i, row in enumerate(self.rows):
            if len(row) != n:
                raise AutomatonError(f"row {i} has {len(row)} entries, expected {n}")
            total = ZERO
            for w in row:
                if w < 0:
                    raise AutomatonError(f"negative entry {w} in row {i}")
                total += w
            if total != 1:
                raise AutomatonError(f"row {i} sums to {total}, not 1")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, n: int) -> "TransitionMatrix":
        return cls(
            tuple(
                tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
            )
        )

    def __matmul__(self, other: "TransitionMatrix") -> "TransitionMatrix":
        if self.n != other.n:
            raise AutomatonError("matrix dimension mismatch")
        cols = tuple(zip(*other.rows))
        return TransitionMatrix(
            tuple(
                tuple(
                    sum((a * b for a, b in zip(row, col) if a), ZERO)
                    for col in cols
                )
                for row in self.rows
            )
        )

    def support(self) -> LimitWord:
        return LimitWord(
            tuple(
                sum(1 << j for j, w in enumerate(row) if w > 0) for row in self.rows
            )
        )

    def __call__(self, s: int, t: int) -> Fraction:
        return self.rows[s][t]


@dataclass(frozen=True)
class ProbAutomaton:
    """Complete probabilistic automaton over a finite alphabet.

    States carry display names; their index in `states` is the state id.
    The transition table is total: one row-stochastic matrix per letter.
    `priority` is only present for parity automata and is then total.
    """

    name: str
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    initial: Distribution
    matrices: tuple[TransitionMatrix, ...]
    final: frozenset[int]
    priority: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.states)
        if n == 0:
            raise AutomatonError("automaton needs at least one state")
        if len(set(self.states)) != n:
            raise AutomatonError("state names must be unique")
        if not self.alphabet:
            raise AutomatonError("alphabet must be nonempty")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise AutomatonError("alphabet letters must be unique")
        if len(self.matrices) != len(self.alphabet):
            raise AutomatonError("one transition matrix per letter required")
        for a, m in zip(self.alphabet, self.matrices):
            if m.n != n:
                raise AutomatonError(f"matrix for letter {a!r} has wrong dimension")
        if self.initial.n != n:
            raise AutomatonError("initial distribution dimension mismatch")
        if not all(0 <= s < n for s in self.final):
            raise AutomatonError("final state out of range")
        if self.priority is not None:
            if len(self.priority) != n:
                raise AutomatonError("priority function must be total on states")
            if any(p < 0 for p in self.priority):
                raise AutomatonError("priorities must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.states)

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise AutomatonError(f"unknown state {name!r}") from None

    def letter_index(self, letter: str) -> int:
        try:
            return self.alphabet.index(letter)
        except ValueError:
            raise AutomatonError(f"unknown letter {letter!r}") from None

    def letter_matrix(self, letter: str) -> TransitionMatrix:
        return self.matrices[self.letter_index(letter)]

    def letter_support(self, letter: str) -> LimitWord:
        return self.letter_matrix(letter).support()

    @classmethod
    def from_tables(
        cls,
        name: str,
        states: Sequence[str],
        alphabet: Sequence[str],
        initial: Mapping[str, RationalLike] | str,
        transitions: Mapping[tuple[str, str], Mapping[str, RationalLike]],
        final: Iterable[str],
        priority: Mapping[str, int] | None = None,
    ) -> "ProbAutomaton":
        """Build from name-keyed tables; every (state, letter) pair must appear."""
        states = tuple(states)
        alphabet = tuple(alphabet)
        index = {s: i for i, s in enumerate(states)}
        n = len(states)
        if isinstance(initial, str):
            init = Distribution.point(n, index[initial])
        else:
            init = Distribution.from_pairs(
                n, {index[s]: w for s, w in initial.items()}
            )
        matrices = []
        for a in alphabet:
            rows = []
            for s in states:
                if (s, a) not in transitions:
                    raise AutomatonError(f"missing transition row for ({s!r}, {a!r})")
                row = [ZERO] * n
                for t, w in transitions[(s, a)].items():
                    row[index[t]] += as_fraction(w)
                rows.append(tuple(row))
            matrices.append(TransitionMatrix(tuple(rows)))
        extra = set(transitions) - {(s, a) for s in states for a in alphabet}
        if extra:
            raise AutomatonError(f"transition rows for unknown pairs: {sorted(extra)}")
        prio = None
        if priority is not None:
            prio = tuple(priority[s] for s in states)
        return cls(
            name=name,
            states=states,
            alphabet=alphabet,
            initial=init,
            matrices=tuple(matrices),
            final=frozenset(index[f] for f in final),
            priority=prio,
        )

    # -- word operations ----------------------------------------------------

    def step(self, dist: Distribution, letter: str) -> Distribution:
        """One-letter image of a distribution, exactly."""
        matrix = self.letter_matrix(letter)
        n = self.n
        out = [ZERO] * n
        for s, w in enumerate(dist.weights):
            if w:
                row = matrix.rows[s]
                for t in range(n):
                    if row[t]:
                        out[t] += w * row[t]
        return Distribution(tuple(out))

    def distribution_after(self, word: Iterable[str]) -> Distribution:
        dist = self.initial
        for letter in word:
            dist = self.step(dist, letter)
        return dist

    def acceptance_probability(self, word: Iterable[str]) -> Fraction:
        """Exact probability that reading the word ends in a final state."""
        dist = self.distribution_after(word)
        value = sum((dist[t] for t in self.final), ZERO)
        assert 0 <= value <= 1
        return value

    def transition_matrix(self, word: Iterable[str]) -> TransitionMatrix:
        """Product of the letter matrices in word order (identity for the empty word)."""
        result = TransitionMatrix.identity(self.n)
        for letter in word:
            result = result @ self.letter_matrix(letter)
        return result

    def word_support(self, word: Iterable[str]) -> LimitWord:
        result = LimitWord.identity(self.n)
        for letter in word:
            result = result * self.letter_support(letter)
        return result

    def is_idempotent_word(self, word: Sequence[str]) -> bool:
        """True iff the word's matrix has the same support as its square."""
        u = self.word_support(word)
        return u.is_idempotent()

    def with_final(self, final_names: Iterable[str]) -> "ProbAutomaton":
        return replace(
            self, final=frozenset(self.state_index(s) for s in final_names)
        )

    def renamed(self, mapping: Mapping[str, str]) -> "ProbAutomaton":
        return replace(self, states=tuple(mapping.get(s, s) for s in self.states))


# ---------------------------------------------------------------------------
# Compositions
# ---------------------------------------------------------------------------


def _component_prefix(i: int) -> str:
    if i < 26:
        return chr(ord("A") + i) + "."
    return f"P{i}."


def _check_same_alphabet(automata: Sequence[ProbAutomaton]) -> tuple[str, ...]:
    first = automata[0].alphabet
    for other in automata[1:]:
        if set(other.alphabet) != set(first):
            raise AutomatonError(
                f"alphabet mismatch: {first} vs {other.alphabet}"
            )
    return first


def parallel_compose(*automata: ProbAutomaton) -> ProbAutomaton:
    """Disjoint union run in parallel, each component entered with weight 1/k.

    For two automata this gives the usual half/half split, so the acceptance
    probability of any word is the average of the components'.  State names
    are prefixed per component to force disjointness.
    """
    if len(automata) < 2:
        raise AutomatonError("parallel composition needs at least two automata")
    alphabet = _check_same_alphabet(automata)
    k = len(automata)
    share = Fraction(1, k)
    states: list[str] = []
    weights: list[Fraction] = []
    final: set[int] = set()
    offsets = []
    for i, aut in enumerate(automata):
        prefix = _component_prefix(i)
        offsets.append(len(states))
        for s in aut.states:
            states.append(prefix + s)
        weights.extend(aut.initial.scaled(share))
        final.update(offsets[i] + f for f in aut.final)
    n = len(states)
    matrices = []
    for a in alphabet:
        rows = [None] * n
        for i, aut in enumerate(automata):
            m = aut.letter_matrix(a)
            off = offsets[i]
            for s in range(aut.n):
                row = [ZERO] * n
                for t in range(aut.n):
                    row[off + t] = m.rows[s][t]
                rows[off + s] = tuple(row)
        matrices.append(TransitionMatrix(tuple(rows)))
    return ProbAutomaton(
        name="par(" + ",".join(aut.name for aut in automata) + ")",
        states=tuple(states),
        alphabet=alphabet,
        initial=Distribution(tuple(weights)),
        matrices=tuple(matrices),
        final=frozenset(final),
    )


def synchronized_product(a: ProbAutomaton, b: ProbAutomaton) -> ProbAutomaton:
    """Pair automaton reading each letter in both components at once.

    Transition weight of ((q, q'), a, (t, t')) is the product of the
    component weights; initial weights multiply likewise and the final pairs
    are those final in both components.
    """
    alphabet = _check_same_alphabet([a, b])
    states = tuple(f"{s},{t}" for s in a.states for t in b.states)
    nb = b.n

    def pair(i: int, j: int) -> int:
        return i * nb + j

    init = Distribution(
        tuple(
            a.initial[i] * b.initial[j] for i in range(a.n) for j in range(b.n)
        )
    )
    matrices = []
    for letter in alphabet:
        ma = a.letter_matrix(letter)
        mb = b.letter_matrix(letter)
        rows = []
        for i in range(a.n):
            for j in range(b.n):
                row = [ZERO] * len(states)
                for t in range(a.n):
                    wa = ma.rows[i][t]
                    if not wa:
                        continue
                    for u in range(b.n):
                        wb = mb.rows[j][u]
                        if wb:
                            row[pair(t, u)] = wa * wb
                rows.append(tuple(row))
        matrices.append(TransitionMatrix(tuple(rows)))
    final = frozenset(pair(i, j) for i in a.final for j in b.final)
    return ProbAutomaton(
        name=f"prod({a.name},{b.name})",
        states=states,
        alphabet=alphabet,
        initial=init,
        matrices=tuple(matrices),
        final=final,
    )


@dataclass(frozen=True)
class DeterministicTransducer:
    """Deterministic machine reading the automaton's states as its input.

    `delta[m][q]` is the move on observing automaton state q while in
    transducer state m; it must be total.  `start` gives the transducer state
    used when the run begins in automaton state q (a plain constant start is
    the common case, but the start may observe the initial state).
    """

    name: str
    states: tuple[str, ...]
    inputs: tuple[str, ...]
    delta: Mapping[tuple[str, str], str]
    start: Mapping[str, str]

    def __post_init__(self) -> None:
        for m in self.states:
            for q in self.inputs:
                if (m, q) not in self.delta:
                    raise AutomatonError(
                        f"transducer not total: missing move for ({m!r}, {q!r})"
                    )
                if self.delta[(m, q)] not in self.states:
                    raise AutomatonError(
                        f"transducer move for ({m!r}, {q!r}) leaves the state set"
                    )
        for q in self.inputs:
            if q not in self.start:
                raise AutomatonError(f"transducer start missing for input {q!r}")
            if self.start[q] not in self.states:
                raise AutomatonError(f"transducer start for {q!r} is unknown")

    @classmethod
    def constant_start(
        cls,
        name: str,
        states: Sequence[str],
        inputs: Sequence[str],
        delta: Mapping[tuple[str, str], str],
        start: str,
    ) -> "DeterministicTransducer":
        return cls(
            name=name,
            states=tuple(states),
            inputs=tuple(inputs),
            delta=dict(delta),
            start={q: start for q in inputs},
        )


def transducer_compose(
    aut: ProbAutomaton, trans: DeterministicTransducer
) -> ProbAutomaton:
    """Run the automaton while the transducer deterministically observes its states.

    From pair (q, m) on letter a the probabilistic component moves by the
    automaton's law and the transducer moves to delta(m, q), reading the state
    it is leaving.  The result has exactly |Q| * |M| states.
    """
    if set(trans.inputs) != set(aut.states):
        raise AutomatonError(
            "transducer input alphabet must be the automaton's state set"
        )
    nm = len(trans.states)
    m_index = {m: i for i, m in enumerate(trans.states)}
    states = tuple(f"{q},{m}" for q in aut.states for m in trans.states)

    def pair(qi: int, mi: int) -> int:
        return qi * nm + mi

    init_weights = [ZERO] * len(states)
    for qi, w in enumerate(aut.initial.weights):
        if w:
            mi = m_index[trans.start[aut.states[qi]]]
            init_weights[pair(qi, mi)] = w
    matrices = []
    for letter in aut.alphabet:
        ma = aut.letter_matrix(letter)
        rows = []
        for qi in range(aut.n):
            for mi in range(nm):
                target_m = m_index[trans.delta[(trans.states[mi], aut.states[qi])]]
                row = [ZERO] * len(states)
                for t in range(aut.n):
                    w = ma.rows[qi][t]
                    if w:
                        row[pair(t, target_m)] = w
                rows.append(tuple(row))
        matrices.append(TransitionMatrix(tuple(rows)))
    final = frozenset(
        pair(qi, mi) for qi in aut.final for mi in range(nm)
    )
    return ProbAutomaton(
        name=f"comp({aut.name},{trans.name})",
        states=states,
        alphabet=aut.alphabet,
        initial=Distribution(tuple(init_weights)),
        matrices=tuple(matrices),
        final=final,
    )
