"""Named example automata used by the test suite and shipped as .aut files.

fig1 and fig2 are the two standing examples of the analysis: fig1(x) is the
five-state automaton whose value is 1 exactly when x > 1/2 but whose monoid
analysis is inconclusive (it is not leaktight), and fig2 is the three-state
automaton exhibiting a single leak, where pumping a and then reading b lets
probability escape from the loop state into the sink.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Mapping, Sequence

from .automaton import AutomatonError, ProbAutomaton, parallel_compose


def fig1(x) -> ProbAutomaton:
    """Five-state automaton with a left/right tug of war, parametrized by x.

    From the central state, b splits evenly between the two loop states; on
    the left a keeps the loop with probability x, on the right with 1 - x.
    Reading b from a loop state commits to the accepting (left) or rejecting
    (right) sink.  Value 1 iff x > 1/2; never leaktight.
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise AutomatonError("fig1 needs a loop probability strictly inside (0, 1)")
    tag = str(x).replace("/", "-")
    return ProbAutomaton.from_tables(
        name=f"fig1_x{tag}",
        states=["0", "L1", "R1", "L2", "R2"],
        alphabet=["a", "b"],
        initial="0",
        transitions={
            ("0", "b"): {"L1": Fraction(1, 2), "R1": Fraction(1, 2)},
            ("0", "a"): {"0": 1},
            ("L1", "a"): {"L1": x, "0": 1 - x},
            ("L1", "b"): {"L2": 1},
            ("R1", "a"): {"R1": 1 - x, "0": x},
            ("R1", "b"): {"R2": 1},
            ("L2", "a"): {"L2": 1},
            ("L2", "b"): {"L2": 1},
            ("R2", "a"): {"R2": 1},
            ("R2", "b"): {"R2": 1},
        },
        final=["L2"],
    )


def fig2() -> ProbAutomaton:
    """Three-state automaton with one leak, from the loop state to the sink.

    Reading a from the loop state L1 either stays (probability 1/2) or falls
    back to the start; reading b from L1 enters the sink L2.  Repeating a
    long block of a's and then b moves almost all probability back through
    the start into L1, yet a vanishing sliver keeps slipping into L2: the
    supports stabilize with L1 and L2 both recurrent while the L1 -> L2
    probability stays positive and tends to 0.  The loop probability 1/2 is
    arbitrary; only the supports matter for the leak.
    """
    h = Fraction(1, 2)
    return ProbAutomaton.from_tables(
        name="fig2",
        states=["0", "L1", "L2"],
        alphabet=["a", "b"],
        initial="0",
        transitions={
            ("0", "a"): {"0": 1},
            ("0", "b"): {"L1": 1},
            ("L1", "a"): {"L1": h, "0": h},
            ("L1", "b"): {"L2": 1},
            ("L2", "a"): {"L2": 1},
            ("L2", "b"): {"L2": 1},
        },
        final=["L2"],
    )


def two_state_loop() -> ProbAutomaton:
    """Two states, one letter: stay or fall into the accepting sink.

    P(a^n) = 1 - 2^(-n), so the value is 1, certified by iterating a.
    """
    h = Fraction(1, 2)
    return ProbAutomaton.from_tables(
        name="two_state_loop",
        states=["s", "f"],
        alphabet=["a"],
        initial="s",
        transitions={
            ("s", "a"): {"s": h, "f": h},
            ("f", "a"): {"f": 1},
        },
        final=["f"],
    )


def half_split() -> ProbAutomaton:
    """Leaktight automaton of value 1/2: one coin flip into two sinks.

    Stands in for a leaktight automaton without value 1.
    """
    h = Fraction(1, 2)
    return ProbAutomaton.from_tables(
        name="half_split",
        states=["s", "acc", "rej"],
        alphabet=["a"],
        initial="s",
        transitions={
            ("s", "a"): {"acc": h, "rej": h},
            ("acc", "a"): {"acc": 1},
            ("rej", "a"): {"rej": 1},
        },
        final=["acc"],
    )


def det_chain(length: int = 4) -> ProbAutomaton:
    """Deterministic chain: a advances towards the final sink, b stays put."""
    states = [f"q{i}" for i in range(length)]
    transitions = {}
    for i, s in enumerate(states):
        nxt = states[min(i + 1, length - 1)]
        transitions[(s, "a")] = {nxt: 1}
        transitions[(s, "b")] = {s: 1}
    return ProbAutomaton.from_tables(
        name="det_chain",
        states=states,
        alphabet=["a", "b"],
        initial=states[0],
        transitions=transitions,
        final=[states[-1]],
    )


def det_cycle(length: int = 3) -> ProbAutomaton:
    """Deterministic cycle on a; b resets to the start state."""
    states = [f"c{i}" for i in range(length)]
    transitions = {}
    for i, s in enumerate(states):
        transitions[(s, "a")] = {states[(i + 1) % length]: 1}
        transitions[(s, "b")] = {states[0]: 1}
    return ProbAutomaton.from_tables(
        name="det_cycle",
        states=states,
        alphabet=["a", "b"],
        initial=states[0],
        transitions=transitions,
        final=[states[-1]],
    )


def with_priorities(aut: ProbAutomaton, priority: Mapping[str, int]) -> ProbAutomaton:
    return dataclasses.replace(
        aut, priority=tuple(priority[s] for s in aut.states)
    )


def parity_all_even() -> ProbAutomaton:
    """Every priority even on a value-1 automaton: parity value 1 holds."""
    aut = with_priorities(two_state_loop(), {"s": 2, "f": 0})
    return dataclasses.replace(aut, name="parity_even")


def parity_all_odd() -> ProbAutomaton:
    """Every priority odd: no accepting pair exists, parity value 1 fails."""
    aut = with_priorities(two_state_loop(), {"s": 1, "f": 3})
    return dataclasses.replace(aut, name="parity_odd")


def parity_two_state() -> ProbAutomaton:
    """Priorities 1 on the loop state, 0 on the sink: parity value 1 holds."""
    aut = with_priorities(two_state_loop(), {"s": 1, "f": 0})
    return dataclasses.replace(aut, name="parity_two_state")


def pspace_intersection(automata: Sequence[ProbAutomaton]) -> ProbAutomaton:
    """Parallel composition entering each of the given automata with weight 1/n.

    With deterministic components this is the emptiness-of-intersection
    construction: the composite has value 1 iff some word is accepted by all
    components.
    """
    if len(automata) < 2:
        raise AutomatonError("intersection composer needs at least two automata")
    return parallel_compose(*automata)


def fixture_library() -> dict[str, ProbAutomaton]:
    """All fixed fixtures by name (fig1 is instantiated at 1/4, 1/2, 3/4)."""
    fixtures = [
        fig1(Fraction(1, 4)),
        fig1(Fraction(1, 2)),
        fig1(Fraction(3, 4)),
        fig2(),
        two_state_loop(),
        half_split(),
        det_chain(),
        det_cycle(),
        parity_all_even(),
        parity_all_odd(),
        parity_two_state(),
    ]
    return {aut.name: aut for aut in fixtures}
