"""End-to-end decision procedures.

`decide` is the three-way analysis: a value-1 witness in the saturated monoid
proves value 1 unconditionally; otherwise the absence of a leak witness
certifies the automaton leaktight, in which case value 1 is refuted; a leak
witness means the algebra is inconclusive and no value claim is made.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .automaton import (
    AutomatonError,
    DeterministicTransducer,
    Distribution,
    ProbAutomaton,
    transducer_compose,
)
from .monoid import (
    DEFAULT_BUDGET,
    MonoidClosure,
    WitnessReport,
    find_leak_witness,
    find_value1_witness,
    saturate,
)

import dataclasses
import itertools


class Outcome(str, Enum):
    VALUE1_TRUE = "VALUE1_TRUE"
    VALUE1_FALSE_LEAKTIGHT = "VALUE1_FALSE_LEAKTIGHT"
    NOT_LEAKTIGHT = "NOT_LEAKTIGHT"

    def __str__(self) -> str:  # pragma: no cover - trivial
        return self.value


@dataclass(frozen=True)
class ClosureStats:
    elements: int
    max_sharp_height: int
    wall_time: float  # seconds; kept on the object, never serialized


@dataclass(frozen=True)
class Verdict:
    """Outcome of the three-way decision, with its certificate.

    VALUE1_TRUE carries a value-1 witness and is sound for every automaton.
    VALUE1_FALSE_LEAKTIGHT carries no witness: it certifies that the monoid
    has no leak witness, hence the automaton is leaktight and its value is
    below 1.  NOT_LEAKTIGHT carries the leak witness and makes no value
    claim.
    """

    outcome: Outcome
    witness: WitnessReport | None
    stats: ClosureStats

    def lines(self, aut: ProbAutomaton) -> list[str]:
        head = self.outcome.value
        if self.outcome is Outcome.VALUE1_TRUE:
            head += f" witness={self.witness.trees[0].expression()}"
        elif self.outcome is Outcome.NOT_LEAKTIGHT:
            r, q = self.witness.state_names(aut)
            head += (
                f" leak=(r={r},q={q})"
                f" witness={self.witness.trees[0].expression()}"
            )
        out = [head]
        out.append(
            f"closure: {self.stats.elements} elements,"
            f" max sharp height {self.stats.max_sharp_height}"
        )
        return out

    def to_dict(self, aut: ProbAutomaton) -> dict:
        doc: dict = {
            "outcome": self.outcome.value,
            "closure": {
                "elements": self.stats.elements,
                "max_sharp_height": self.stats.max_sharp_height,
            },
        }
        if self.witness is not None:
            doc["witness"] = witness_dict(self.witness, aut)
        return doc


def witness_dict(witness: WitnessReport, aut: ProbAutomaton) -> dict:
    doc: dict = {"kind": witness.kind}
    if witness.kind == "leak":
        r, q = witness.state_names(aut)
        doc["states"] = {"r": r, "q": q}
    elif witness.kind == "non_simplicity":
        r, t = witness.state_names(aut)
        doc["states"] = {"r": r, "t": t}
    if witness.element is not None:
        doc["expression"] = witness.trees[0].expression()
        doc["sharp_height"] = witness.trees[0].sharp_height
        doc["word"] = [_row_string(r, witness.element.n) for r in witness.element.word.rows]
        doc["word_plus"] = [
            _row_string(r, witness.element.n) for r in witness.element.plus.rows
        ]
    if witness.triple is not None:
        doc["expressions"] = list(witness.expressions())
    return doc


def _row_string(bits: int, n: int) -> str:
    return "".join("1" if bits >> t & 1 else "0" for t in range(n))


def decide(
    aut: ProbAutomaton,
    budget: int = DEFAULT_BUDGET,
    closure: MonoidClosure | None = None,
) -> Verdict:
    """Run the saturation analysis; any priority annotation is ignored."""
    start = time.perf_counter()
    if closure is None:
        closure = saturate(aut, budget=budget)
    stats = ClosureStats(
        elements=len(closure),
        max_sharp_height=closure.max_sharp_height,
        wall_time=time.perf_counter() - start,
    )
    value1 = find_value1_witness(closure, aut)
    if value1 is not None:
        return Verdict(Outcome.VALUE1_TRUE, value1, stats)
    leak = find_leak_witness(closure)
    if leak is None:
        return Verdict(Outcome.VALUE1_FALSE_LEAKTIGHT, None, stats)
    return Verdict(Outcome.NOT_LEAKTIGHT, leak, stats)


def is_leaktight(
    aut: ProbAutomaton,
    budget: int = DEFAULT_BUDGET,
    closure: MonoidClosure | None = None,
) -> tuple[bool, WitnessReport | None]:
    """True iff the saturated monoid holds no leak witness; the witness
    otherwise."""
    if closure is None:
        closure = saturate(aut, budget=budget)
    leak = find_leak_witness(closure)
    return leak is None, leak


# ---------------------------------------------------------------------------
# Hierarchical check
# ---------------------------------------------------------------------------


def is_hierarchical(aut: ProbAutomaton) -> dict[str, int] | None:
    """Return a witnessing rank function if one exists, else None.

    A rank function must never decrease along positive-probability moves and,
    per (state, letter), allow at most one successor of equal rank.  Any such
    function is constant on the strongly connected components of the union
    support digraph, and giving every component a distinct rank in
    topological order only relaxes the equal-rank constraint; so a rank
    function exists iff every (state, letter) has at most one successor
    inside the state's own component.  That check is exact at every size.
    """
    n = aut.n
    succ = [0] * n
    for m in aut.matrices:
        sup = m.support()
        for s in range(n):
            succ[s] |= sup.rows[s]
    comp = _scc_topological_ranks(succ, n)
    for m in aut.matrices:
        sup = m.support()
        for s in range(n):
            same = [
                t for t in range(n) if sup.rows[s] >> t & 1 and comp[t] == comp[s]
            ]
            if len(same) > 1:
                return None
    rank = {aut.states[s]: comp[s] for s in range(n)}
    assert verify_rank(aut, rank)
    return rank


def verify_rank(aut: ProbAutomaton, rank: Mapping[str, int]) -> bool:
    """Check a rank function against the definition (used to audit results)."""
    n = aut.n
    ranks = [rank[s] for s in aut.states]
    for m in aut.matrices:
        sup = m.support()
        for s in range(n):
            same_rank = []
            for t in range(n):
                if sup.rows[s] >> t & 1:
                    if ranks[t] < ranks[s]:
                        return False
                    if ranks[t] == ranks[s]:
                        same_rank.append(t)
            if len(same_rank) > 1:
                return False
    return True


def _scc_topological_ranks(succ: list[int], n: int) -> list[int]:
    """Tarjan SCC; returns per-state component ids numbered in topological
    order (edges go from lower to higher ids)."""
    index = [0] * n
    low = [0] * n
    on_stack = [False] * n
    visited = [False] * n
    stack: list[int] = []
    comp = [-1] * n
    counter = itertools.count(1)
    comp_count = 0

    for root in range(n):
        if visited[root]:
            continue
        work = [(root, iter(_bits(succ[root])))]
        index[root] = low[root] = next(counter)
        visited[root] = True
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            advanced = False
            for t in it:
                if not visited[t]:
                    index[t] = low[t] = next(counter)
                    visited[t] = True
                    stack.append(t)
                    on_stack[t] = True
                    work.append((t, iter(_bits(succ[t]))))
                    advanced = True
                    break
                if on_stack[t]:
                    low[v] = min(low[v], index[t])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = comp_count
                    if w == v:
                        break
                comp_count += 1
    # Tarjan emits components in reverse topological order.
    return [comp_count - 1 - c for c in comp]


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Parity reduction
# ---------------------------------------------------------------------------

PARITY_STATE_LIMIT = 12


@dataclass(frozen=True)
class SubsetRecord:
    subset: tuple[str, ...]
    finite_verdict: Verdict
    product_verdict: Verdict

    @property
    def uncertified(self) -> bool:
        return (
            self.finite_verdict.outcome is Outcome.NOT_LEAKTIGHT
            or self.product_verdict.outcome is Outcome.NOT_LEAKTIGHT
        )

    @property
    def both_value1(self) -> bool:
        return (
            self.finite_verdict.outcome is Outcome.VALUE1_TRUE
            and self.product_verdict.outcome is Outcome.VALUE1_TRUE
        )


@dataclass(frozen=True)
class ParityReductionResult:
    """Per-subset audit of the reduction from parity acceptance to two
    finite-word value-1 questions.

    value1 is True iff some subset R certifies both sub-automata; in that
    case the enumeration short-circuited at `witness_subset`.  certified is
    False when the answer is negative but some examined subset had an
    inconclusive (not leaktight) sub-verdict.
    """

    value1: bool
    witness_subset: tuple[str, ...] | None
    records: tuple[SubsetRecord, ...]

    @property
    def certified(self) -> bool:
        if self.value1:
            return True
        return not any(r.uncertified for r in self.records)

    def lines(self) -> list[str]:
        out = [f"parity value1: {'true' if self.value1 else 'false'}"]
        if self.witness_subset is not None:
            out.append("witness R={" + ",".join(self.witness_subset) + "}")
        out.append(f"certified: {'true' if self.certified else 'false'}")
        for rec in self.records:
            out.append(
                "R={"
                + ",".join(rec.subset)
                + "} finite="
                + rec.finite_verdict.outcome.value
                + " product="
                + rec.product_verdict.outcome.value
            )
        return out

    def to_dict(self) -> dict:
        return {
            "value1": self.value1,
            "certified": self.certified,
            "witness_subset": (
                list(self.witness_subset) if self.witness_subset else None
            ),
            "records": [
                {
                    "subset": list(rec.subset),
                    "finite": rec.finite_verdict.outcome.value,
                    "product": rec.product_verdict.outcome.value,
                    "uncertified": rec.uncertified,
                }
                for rec in self.records
            ],
        }


def min_priority_tracker(aut: ProbAutomaton) -> DeterministicTransducer:
    """Deterministic tracker of the minimal priority observed so far.

    Its states are the priorities of the automaton; on observing automaton
    state q in tracker state p it moves to min(p, priority(q)), so the value
    never increases along a run.  Started at the priority of the state the
    run begins in.
    """
    if aut.priority is None:
        raise AutomatonError("min-priority tracker needs a parity automaton")
    priorities = sorted(set(aut.priority))
    states = tuple(str(p) for p in priorities)
    delta = {
        (str(p), q): str(min(p, aut.priority[qi]))
        for p in priorities
        for qi, q in enumerate(aut.states)
    }
    start = {q: str(aut.priority[qi]) for qi, q in enumerate(aut.states)}
    return DeterministicTransducer(
        name="minprio",
        states=states,
        inputs=aut.states,
        delta=delta,
        start=start,
    )


def parity_subset_automata(
    aut: ProbAutomaton, subset: tuple[int, ...]
) -> tuple[ProbAutomaton, ProbAutomaton]:
    """The two finite-word automata examined for a subset R.

    The first is the automaton with R as final states.  The second is the
    product with the min-priority tracker, started uniformly over the pairs
    (q, priority(q)) for q in R, accepting pairs (q, e) with q in R and e
    even.
    """
    finite = dataclasses.replace(aut, final=frozenset(subset), priority=None)
    tracker = min_priority_tracker(aut)
    product = transducer_compose(
        dataclasses.replace(aut, priority=None), tracker
    )
    pair_index = {name: i for i, name in enumerate(product.states)}
    start_pairs = [
        pair_index[f"{aut.states[q]},{aut.priority[q]}"] for q in subset
    ]
    finals = frozenset(
        pair_index[f"{aut.states[q]},{p}"]
        for q in subset
        for p in sorted(set(aut.priority))
        if p % 2 == 0
    )
    product = dataclasses.replace(
        product,
        initial=Distribution.uniform(product.n, start_pairs),
        final=finals,
    )
    return finite, product


def parity_value1(
    aut: ProbAutomaton, budget: int = DEFAULT_BUDGET
) -> ParityReductionResult:
    """Decide value 1 for parity acceptance by subset enumeration.

    Subsets of states are tried smallest-first (the empty one can never
    certify and is skipped); the first R whose two finite-word automata both
    come back VALUE1_TRUE settles the answer.  All examined subsets are kept
    in the result for auditability.
    """
    if aut.priority is None:
        raise AutomatonError("parity analysis needs a total priority function")
    if aut.n > PARITY_STATE_LIMIT:
        raise AutomatonError(
            f"parity reduction enumerates 2^|Q| subsets; refusing |Q| > {PARITY_STATE_LIMIT}"
        )
    records: list[SubsetRecord] = []
    witness_subset: tuple[str, ...] | None = None
    for size in range(1, aut.n + 1):
        for subset in itertools.combinations(range(aut.n), size):
            finite, product = parity_subset_automata(aut, subset)
            rec = SubsetRecord(
                subset=tuple(aut.states[q] for q in subset),
                finite_verdict=decide(finite, budget=budget),
                product_verdict=decide(product, budget=budget),
            )
            records.append(rec)
            if rec.both_value1:
                witness_subset = rec.subset
                return ParityReductionResult(
                    value1=True,
                    witness_subset=witness_subset,
                    records=tuple(records),
                )
    return ParityReductionResult(
        value1=False, witness_subset=None, records=tuple(records)
    )
