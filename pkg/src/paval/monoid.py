"""Saturation of the extended Markov monoid and witness extraction.

The monoid of an automaton is the closure of the letter supports (paired with
themselves) and the identity pair under two operations: component-wise
concatenation and iteration of idempotents, which sharpens the first
component and keeps the second.  Saturation explores candidates in order of
derivation size, so the stored derivation tree of every element is one of
minimal size (ties broken towards lower iteration nesting, then by matrix
key); this keeps the recorded nesting depth low, which a test asserts never
exceeds |Q|.

Three kinds of witnesses are read off the saturated monoid:

* value-1 witness: an element sending the whole initial support into final
  states only; its presence proves the automaton has value 1.
* leak witness: an idempotent pair with two recurrent states r, q where the
  asymptotic component has no edge r -> q but the finite-horizon component
  does; its absence certifies the automaton leaktight.
* non-simplicity witness: a triple (u, v, w) whose combination u v# w is
  idempotent with a recurrent state r such that u v reaches a v-transient
  state from r.

Saturation and witness extraction are deterministic (identical to a
single-threaded run); closures and witnesses are immutable values that can be
shared freely across concurrent analyses.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .automaton import ProbAutomaton
from .limitwords import (
    DerivationTree,
    ExtendedLimitWord,
    LimitWord,
    _bool_mul,
    evaluate_tree,
)

DEFAULT_BUDGET = 10**6


class BudgetError(RuntimeError):
    """The element budget was hit; the partial closure is reported, not used."""

    def __init__(self, budget: int, found: int):
        self.budget = budget
        self.found = found
        super().__init__(
            f"monoid closure exceeded the element budget of {budget}"
            f" ({found} elements found before giving up)"
        )


@dataclass(frozen=True)
class MonoidClosure:
    """The saturated extended monoid with one derivation tree per element.

    `elements` is in deterministic saturation order (derivation size, then
    iteration nesting, then matrix key).  The first-component projection is
    available through `markov_elements`.
    """

    automaton: ProbAutomaton
    elements: tuple[ExtendedLimitWord, ...]
    trees: tuple[DerivationTree, ...]
    generators: Mapping[str, ExtendedLimitWord]

    @property
    def identity(self) -> ExtendedLimitWord:
        return ExtendedLimitWord.identity(self.automaton.n)

    def __len__(self) -> int:
        return len(self.elements)

    def index_of(self, element: ExtendedLimitWord) -> int:
        try:
            return self._index[element.key()]
        except KeyError:
            raise KeyError("element not in closure") from None

    @property
    def _index(self) -> dict:
        key = "_index_cache"
        cache = self.__dict__.get(key)
        if cache is None:
            cache = {e.key(): i for i, e in enumerate(self.elements)}
            object.__setattr__(self, key, cache)
        return cache

    def __contains__(self, element: ExtendedLimitWord) -> bool:
        return element.key() in self._index

    def tree(self, element: ExtendedLimitWord) -> DerivationTree:
        return self.trees[self.index_of(element)]

    def sharp_height(self, element: ExtendedLimitWord) -> int:
        """Iteration nesting of the stored derivation (an upper bound on the
        minimal nesting over all derivations)."""
        return self.tree(element).sharp_height

    @property
    def max_sharp_height(self) -> int:
        return max(t.sharp_height for t in self.trees)

    def markov_elements(self) -> tuple[LimitWord, ...]:
        """First-component projection, in first-appearance order."""
        seen = {}
        for e in self.elements:
            if e.word.rows not in seen:
                seen[e.word.rows] = e.word
        return tuple(seen.values())

    def markov_tree(self, word: LimitWord) -> DerivationTree:
        """Stored derivation of the first element projecting onto `word`."""
        for e, t in zip(self.elements, self.trees):
            if e.word.rows == word.rows:
                return t
        raise KeyError("limit word not in the monoid projection")

    def one_step_extension(self) -> Iterator[ExtendedLimitWord]:
        """Yield anything a further closure pass would add (nothing at a fixpoint)."""
        for a in self.elements:
            if a.is_idempotent():
                it = a.iterate()
                if it not in self:
                    yield it
            for b in self.elements:
                prod = a * b
                if prod not in self:
                    yield prod


def _idempotent_rows(rows: tuple[int, ...]) -> bool:
    return _bool_mul(rows, rows) == rows


def _iterate_rows(rows: tuple[int, ...]) -> tuple[int, ...]:
    n = len(rows)
    cols = [0] * n
    for s, bits in enumerate(rows):
        sbit = 1 << s
        for t in range(n):
            if bits >> t & 1:
                cols[t] |= sbit
    rec_mask = 0
    for s in range(n):
        if rows[s] & ~cols[s] == 0:
            rec_mask |= 1 << s
    return tuple(r & rec_mask for r in rows)


def saturate(aut: ProbAutomaton, budget: int = DEFAULT_BUDGET) -> MonoidClosure:
    """Compute the full extended monoid of the automaton.

    Uniform-cost exploration by derivation size: a candidate's size is the
    node count of its tree, so the first time an element is popped its stored
    tree has minimal size (ties prefer lower iteration nesting).  Exceeding
    `budget` distinct elements raises BudgetError rather than truncating.

    The hot loop works on raw bitmask row tuples; element objects are built
    once at the end.
    """
    _mul = _bool_mul
    n = aut.n
    heap: list = []
    seq = 0
    queued_best: dict = {}

    def push(size: int, height: int, key, tree: DerivationTree) -> None:
        nonlocal seq
        best = queued_best.get(key)
        if best is not None and best <= (size, height):
            return
        queued_best[key] = (size, height)
        heapq.heappush(heap, (size, height, key, seq, tree))
        seq += 1

    id_rows = tuple(1 << i for i in range(n))
    push(1, 0, (id_rows, id_rows), DerivationTree.leaf(None))
    gen_rows = {}
    for a in aut.alphabet:
        rows = aut.letter_support(a).rows
        gen_rows[a] = rows
        push(1, 0, (rows, rows), DerivationTree.leaf(a))

    closed: dict = {}
    keys: list = []
    trees: list[DerivationTree] = []
    sizes: list[int] = []

    while heap:
        size, height, key, _, tree = heapq.heappop(heap)
        if key in closed:
            continue
        if len(keys) >= budget:
            raise BudgetError(budget, len(keys))
        closed[key] = len(keys)
        keys.append(key)
        trees.append(tree)
        sizes.append(size)

        u, p = key
        if _idempotent_rows(u) and _idempotent_rows(p):
            sharp_key = (_iterate_rows(u), p)
            if sharp_key not in closed:
                push(size + 1, height + 1, sharp_key, DerivationTree.iterate(tree))
        for j in range(len(keys)):
            ou, op = keys[j]
            otree, osize = trees[j], sizes[j]
            cand_size = size + osize + 1
            cand_height = max(height, otree.sharp_height)
            left = (_mul(u, ou), _mul(p, op))
            if left not in closed:
                push(cand_size, cand_height, left, DerivationTree.concat(tree, otree))
            right = (_mul(ou, u), _mul(op, p))
            if right not in closed:
                push(cand_size, cand_height, right, DerivationTree.concat(otree, tree))

    elements = tuple(
        ExtendedLimitWord(LimitWord(u), LimitWord(p)) for u, p in keys
    )
    generators = {
        a: ExtendedLimitWord(LimitWord(rows), LimitWord(rows))
        for a, rows in gen_rows.items()
    }
    return MonoidClosure(
        automaton=aut,
        elements=elements,
        trees=tuple(trees),
        generators=generators,
    )


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WitnessReport:
    """A re-checkable certificate extracted from the monoid.

    kind is "value1", "leak" or "non_simplicity".  For value1 and leak
    witnesses `element` holds the extended pair; for triples the three
    first-component words are in `triple`.  `states` carries the witnessing
    state pair: (r, q) for a leak, (r, t) for non-simplicity, empty for a
    value-1 witness.  `trees` are the stored derivations, in element order.
    """

    kind: str
    states: tuple[int, ...]
    element: ExtendedLimitWord | None = None
    triple: tuple[LimitWord, LimitWord, LimitWord] | None = None
    trees: tuple[DerivationTree, ...] = ()

    def state_names(self, aut: ProbAutomaton) -> tuple[str, ...]:
        return tuple(aut.states[s] for s in self.states)

    def expressions(self) -> tuple[str, ...]:
        return tuple(t.expression() for t in self.trees)

    def verify(self, aut: ProbAutomaton) -> bool:
        """Re-check the defining conditions from scratch."""
        if self.kind == "value1":
            return _is_value1_witness(self.element.word, aut)
        if self.kind == "leak":
            r, q = self.states
            e = self.element
            if not e.is_idempotent():
                return False
            recurrent = e.word.recurrent_states()
            return (
                r in recurrent
                and q in recurrent
                and not e.word(r, q)
                and e.plus(r, q)
            )
        if self.kind == "non_simplicity":
            r, t = self.states
            u, v, w = self.triple
            if not v.is_idempotent():
                return False
            combined = u * v.iterate() * w
            if not combined.is_idempotent():
                return False
            if r not in combined.recurrent_states():
                return False
            if not (u * v)(r, t):
                return False
            return t not in v.recurrent_states()
        raise ValueError(f"unknown witness kind {self.kind!r}")


def _is_value1_witness(word: LimitWord, aut: ProbAutomaton) -> bool:
    final_mask = 0
    for f in aut.final:
        final_mask |= 1 << f
    return all(
        word.rows[s] & ~final_mask == 0 for s in aut.initial.support()
    )


def find_value1_witness(
    closure: MonoidClosure, aut: ProbAutomaton | None = None
) -> WitnessReport | None:
    """An element sending every initial-support state into final states only.

    Among all witnessing elements the one with the lowest stored iteration
    nesting is returned (then smallest derivation, then matrix key), so
    reports are deterministic and pump as gently as possible.
    """
    aut = aut or closure.automaton
    best = None
    for element, tree in zip(closure.elements, closure.trees):
        if _is_value1_witness(element.word, aut):
            rank = (tree.sharp_height, tree.size, element.key())
            if best is None or rank < best[0]:
                best = (rank, element, tree)
    if best is None:
        return None
    _, element, tree = best
    return WitnessReport(kind="value1", states=(), element=element, trees=(tree,))


def iter_leak_witnesses(closure: MonoidClosure) -> Iterator[WitnessReport]:
    """Every leak witness in the closure, in deterministic element order."""
    for element, tree in zip(closure.elements, closure.trees):
        if not element.is_idempotent():
            continue
        recurrent = sorted(element.word.recurrent_states())
        for r in recurrent:
            for q in recurrent:
                if r == q:
                    continue
                if not element.word(r, q) and element.plus(r, q):
                    yield WitnessReport(
                        kind="leak", states=(r, q), element=element, trees=(tree,)
                    )


def find_leak_witness(closure: MonoidClosure) -> WitnessReport | None:
    """An idempotent pair separating two recurrent states r, q: no asymptotic
    edge r -> q, yet a finite-horizon edge.  None means leaktight.

    The reported witness is the lexicographically smallest by
    (state pair, derivation size, matrix key).
    """
    best = None
    for report in iter_leak_witnesses(closure):
        tree = report.trees[0]
        rank = (*report.states, tree.size, report.element.key())
        if best is None or rank < best[0]:
            best = (rank, report)
    return best[1] if best else None


def find_non_simplicity_witness(closure: MonoidClosure) -> WitnessReport | None:
    """A triple (u, v, w) over the first-component projection such that
    u v# w is idempotent with a recurrent state r from which u v reaches a
    v-transient state t.

    The search first follows the stored derivations of leak-like elements
    (splitting them around a topmost iteration node), which almost always
    produces a witness immediately when one exists; if that fails it falls
    back to a full scan over monoid triples in canonical order.  Both phases
    are deterministic.
    """
    words = closure.markov_elements()
    n = closure.automaton.n

    for u, v, w, source_tree in _derivation_guided_triples(closure):
        report = _check_triple(closure, u, v, w)
        if report is not None:
            return report

    idempotents = [v for v in words if v.is_idempotent()]
    for v in idempotents:
        transient_mask = _transient_mask(v, n)
        if not transient_mask:
            continue
        v_sharp = v.iterate()
        for u in words:
            uv = u * v
            if not any(row & transient_mask for row in uv.rows):
                continue
            uvs = u * v_sharp
            for w in words:
                report = _check_triple_fast(closure, u, v, w, uv, uvs, transient_mask)
                if report is not None:
                    return report
    return None


def _transient_mask(v: LimitWord, n: int) -> int:
    recurrent = v.recurrent_states()
    mask = 0
    for t in range(n):
        if t not in recurrent:
            mask |= 1 << t
    return mask


def _check_triple(
    closure: MonoidClosure, u: LimitWord, v: LimitWord, w: LimitWord
) -> WitnessReport | None:
    if not v.is_idempotent():
        return None
    transient_mask = _transient_mask(v, closure.automaton.n)
    if not transient_mask:
        return None
    uv = u * v
    uvs = u * v.iterate()
    return _check_triple_fast(closure, u, v, w, uv, uvs, transient_mask)


def _check_triple_fast(
    closure: MonoidClosure,
    u: LimitWord,
    v: LimitWord,
    w: LimitWord,
    uv: LimitWord,
    uvs: LimitWord,
    transient_mask: int,
) -> WitnessReport | None:
    combined = uvs * w
    if not combined.is_idempotent():
        return None
    for r in sorted(combined.recurrent_states()):
        reach = uv.rows[r] & transient_mask
        if reach:
            t = (reach & -reach).bit_length() - 1
            return WitnessReport(
                kind="non_simplicity",
                states=(r, t),
                triple=(u, v, w),
                trees=(
                    closure.markov_tree(u),
                    closure.markov_tree(v),
                    closure.markov_tree(w),
                ),
            )
    return None


def _derivation_guided_triples(closure: MonoidClosure):
    """Candidate (u, v, w) splits of leak-like elements around a topmost
    iteration node of their stored derivation."""
    n = closure.automaton.n
    identity = LimitWord.identity(n)
    letters = {a: e.word for a, e in closure.generators.items()}
    candidates = []
    for element, tree in zip(closure.elements, closure.trees):
        if not element.is_idempotent():
            continue
        recurrent = element.word.recurrent_states()
        leaky = any(
            not element.word(r, t) and element.plus(r, t)
            for r in recurrent
            for t in range(n)
        )
        if leaky:
            candidates.append((tree.sharp_height, tree.size, element.key(), tree))
    candidates.sort(key=lambda item: item[:3])

    def evaluate(t: DerivationTree) -> LimitWord:
        return evaluate_tree(t, letters, identity)

    for _, _, _, tree in candidates:
        stack = [(tree, identity, identity)]
        while stack:
            node, prefix, suffix = stack.pop()
            if node.kind == "iterate":
                yield prefix, evaluate(node.child), suffix, tree
            elif node.kind == "concat":
                stack.append((node.right, prefix * evaluate(node.left), suffix))
                stack.append((node.left, prefix, evaluate(node.right) * suffix))


# ---------------------------------------------------------------------------
# J-order helper (used by the class-count monotonicity checks)
# ---------------------------------------------------------------------------


def j_below(
    u: LimitWord, v: LimitWord, words: Sequence[LimitWord]
) -> bool:
    """True iff u = a * v * b for some a, b among `words` (exhaustive search)."""
    target = u.rows
    for a in words:
        av = a * v
        for b in words:
            if (av * b).rows == target:
                return True
    return False


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _dot_quote(name: str) -> str:
    return '"' + name.replace('"', '\\"') + '"'


def limit_word_dot(
    element: ExtendedLimitWord | LimitWord,
    state_names: Sequence[str],
    graph_name: str = "limitword",
    label: str | None = None,
) -> str:
    """Graphviz text: solid edges for the word, dashed '+'-labelled edges for
    finite-horizon-only ones (absent for a bare limit word)."""
    if isinstance(element, LimitWord):
        word, plus = element, element
    else:
        word, plus = element.word, element.plus
    lines = [f"digraph {graph_name} {{"]
    lines.append("  rankdir=LR;")
    if label is not None:
        lines.append(f"  label={_dot_quote(label)};")
    for name in state_names:
        lines.append(f"  {_dot_quote(name)};")
    for s, t in word.pairs():
        lines.append(f"  {_dot_quote(state_names[s])} -> {_dot_quote(state_names[t])};")
    for s in range(plus.n):
        extra = plus.rows[s] & ~word.rows[s]
        while extra:
            low = extra & -extra
            t = low.bit_length() - 1
            extra ^= low
            lines.append(
                f"  {_dot_quote(state_names[s])} -> {_dot_quote(state_names[t])}"
                ' [style=dashed, label="+"];'
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_closure_dot(closure: MonoidClosure, directory) -> list[str]:
    """One DOT file per element plus a tab-separated manifest.txt index.

    Manifest lines: filename, sharp height, derivation expression.
    Returns the written file names in order.
    """
    import os

    os.makedirs(directory, exist_ok=True)
    names = []
    manifest_lines = []
    width = max(3, len(str(len(closure.elements) - 1)))
    for i, (element, tree) in enumerate(zip(closure.elements, closure.trees)):
        filename = f"element_{i:0{width}d}.dot"
        expr = tree.expression()
        text = limit_word_dot(
            element,
            closure.automaton.states,
            graph_name=f"element_{i}",
            label=expr,
        )
        with open(os.path.join(directory, filename), "w", encoding="utf-8") as handle:
            handle.write(text)
        names.append(filename)
        manifest_lines.append(f"{filename}\t{tree.sharp_height}\t{expr}")
    with open(os.path.join(directory, "manifest.txt"), "w", encoding="utf-8") as handle:
        handle.write("\n".join(manifest_lines) + "\n")
    names.append("manifest.txt")
    return names
