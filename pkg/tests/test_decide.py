"""Decision procedures: three-way verdicts, leaktightness, ranks, parity."""

import random
from fractions import Fraction

import pytest

from paval import (
    Outcome,
    ProbAutomaton,
    decide,
    is_hierarchical,
    is_leaktight,
    parallel_compose,
    parity_value1,
    synchronized_product,
    transducer_compose,
    verify_rank,
)
from paval.automaton import AutomatonError
from paval.decide import min_priority_tracker, parity_subset_automata
from paval.fixtures import (
    det_chain,
    fig1,
    fig2,
    fixture_library,
    half_split,
    parity_all_even,
    parity_all_odd,
    parity_two_state,
    pspace_intersection,
    two_state_loop,
)

from conftest import (
    random_automaton,
    random_deterministic,
    random_hierarchical,
    random_transducer,
)
from oracles import brute_force_rank


# -- decide -----------------------------------------------------------------


@pytest.mark.parametrize("x", ["1/4", "1/2", "3/4"])
def test_fig1_is_not_leaktight_for_any_x(x):
    verdict = decide(fig1(Fraction(x)))
    assert verdict.outcome is Outcome.NOT_LEAKTIGHT
    assert verdict.witness is not None
    assert verdict.witness.kind == "leak"
    assert verdict.witness.verify(fig1(Fraction(x)))


def test_two_state_loop_has_value_one():
    aut = two_state_loop()
    verdict = decide(aut)
    assert verdict.outcome is Outcome.VALUE1_TRUE
    assert verdict.witness.trees[0].expression() == "iter(a)"
    # Quantitative sanity: P(a^n) = 1 - 2^-n climbs towards 1.
    assert aut.acceptance_probability(["a"] * 10) == 1 - Fraction(1, 2**10)


def test_non_accepting_sink_is_leaktight_without_value_one():
    aut = ProbAutomaton.from_tables(
        "dead", ["s"], ["a"], "s", {("s", "a"): {"s": 1}}, []
    )
    verdict = decide(aut)
    assert verdict.outcome is Outcome.VALUE1_FALSE_LEAKTIGHT
    assert verdict.witness is None


def test_half_split_is_leaktight_without_value_one():
    verdict = decide(half_split())
    assert verdict.outcome is Outcome.VALUE1_FALSE_LEAKTIGHT


def test_decide_ignores_priorities():
    assert decide(parity_two_state()).outcome is Outcome.VALUE1_TRUE


def test_verdict_stats_populated():
    verdict = decide(fig2())
    assert verdict.stats.elements == 32
    assert verdict.stats.max_sharp_height >= 1
    assert verdict.stats.wall_time >= 0


def test_verdict_serialization_round_trips_the_witness():
    from paval import parse_expression, evaluate_tree, LimitWord

    aut = fig1(Fraction(3, 4))
    verdict = decide(aut)
    doc = verdict.to_dict(aut)
    assert doc["outcome"] == "NOT_LEAKTIGHT"
    tree = parse_expression(doc["witness"]["expression"])
    letters = {a: aut.letter_support(a) for a in aut.alphabet}
    word = evaluate_tree(tree, letters, LimitWord.identity(aut.n))
    # The expression's support matrix may be sharper than the asymptotic
    # component only through iterations already recorded in it: re-evaluating
    # must reproduce the witness's first component exactly.
    rows = ["".join(str(word.rows[s] >> t & 1) for t in range(aut.n)) for s in range(aut.n)]
    assert rows == doc["witness"]["word"]


# -- is_leaktight ------------------------------------------------------------


def test_deterministic_automata_are_leaktight():
    rng = random.Random(201)
    for _ in range(20):
        ok, witness = is_leaktight(random_deterministic(rng))
        assert ok and witness is None


def test_fig2_is_not_leaktight():
    ok, witness = is_leaktight(fig2())
    assert not ok
    assert witness.verify(fig2())


def test_parallel_composition_of_leaktight_fixtures_is_leaktight():
    ok, _ = is_leaktight(parallel_compose(two_state_loop(), half_split()))
    assert ok


def test_pspace_composer_builds_leaktight_value1_iff_intersection_nonempty():
    rng = random.Random(77)
    # Deterministic components accepting everything: intersection nonempty.
    parts = [random_deterministic(rng, n_states=2) for _ in range(3)]
    for p in parts:
        assert is_leaktight(p)[0]
    everything = [p.with_final(p.states) for p in parts]
    composite = pspace_intersection(everything)
    assert is_leaktight(composite)[0]
    assert decide(composite).outcome is Outcome.VALUE1_TRUE
    # Empty one component's language: the intersection dies with it.
    nothing = [everything[0].with_final([]), *everything[1:]]
    assert decide(pspace_intersection(nothing)).outcome is not Outcome.VALUE1_TRUE


# -- hierarchical ------------------------------------------------------------


def test_chain_is_hierarchical_with_positional_ranks():
    aut = det_chain(4)
    rank = is_hierarchical(aut)
    assert rank == {"q0": 0, "q1": 1, "q2": 2, "q3": 3}
    assert verify_rank(aut, rank)


def test_fig1_is_not_hierarchical():
    assert is_hierarchical(fig1(Fraction(3, 4))) is None
    assert brute_force_rank(fig1(Fraction(3, 4))) is None


def test_hierarchical_matches_brute_force_on_random_automata():
    rng = random.Random(303)
    for _ in range(40):
        aut = random_automaton(rng, n_states=rng.randint(2, 4))
        rank = is_hierarchical(aut)
        brute = brute_force_rank(aut)
        assert (rank is None) == (brute is None)
        if rank is not None:
            assert verify_rank(aut, rank)
            assert verify_rank(aut, brute)


def test_constructed_hierarchical_automata_are_recognized():
    rng = random.Random(404)
    for _ in range(25):
        aut = random_hierarchical(rng)
        rank = is_hierarchical(aut)
        assert rank is not None
        assert verify_rank(aut, rank)


def test_hierarchical_implies_leaktight_on_samples():
    rng = random.Random(505)
    for _ in range(15):
        aut = random_hierarchical(rng)
        assert is_leaktight(aut)[0]


# -- parity reduction ---------------------------------------------------------


def test_parity_all_even_is_true():
    result = parity_value1(parity_all_even())
    assert result.value1 and result.certified
    assert result.witness_subset is not None


def test_parity_all_odd_is_false():
    result = parity_value1(parity_all_odd())
    assert not result.value1
    assert result.certified
    # No accepting pair can exist in any product automaton.
    for rec in result.records:
        assert rec.product_verdict.outcome is not Outcome.VALUE1_TRUE


def test_parity_two_state_is_true_via_the_sink():
    result = parity_value1(parity_two_state())
    assert result.value1
    assert result.witness_subset == ("f",)


def test_parity_answer_invariant_under_renaming():
    aut = parity_two_state()
    renamed = aut.renamed({"s": "loop", "f": "sink"})
    assert parity_value1(renamed).value1 == parity_value1(aut).value1
    odd = parity_all_odd().renamed({"s": "x", "f": "y"})
    assert parity_value1(odd).value1 == parity_value1(parity_all_odd()).value1


def test_parity_answer_invariant_under_unreachable_duplicate():
    base = parity_two_state()
    grown = ProbAutomaton.from_tables(
        "padded",
        ["s", "f", "ghost"],
        ["a"],
        "s",
        {
            ("s", "a"): {"s": Fraction(1, 2), "f": Fraction(1, 2)},
            ("f", "a"): {"f": 1},
            ("ghost", "a"): {"ghost": 1},
        },
        ["f"],
        priority={"s": 1, "f": 0, "ghost": 1},
    )
    assert parity_value1(grown).value1 == parity_value1(base).value1


def test_parity_requires_total_priority():
    with pytest.raises(AutomatonError):
        parity_value1(two_state_loop())


def test_parity_refuses_oversized_state_spaces():
    states = [f"s{i}" for i in range(13)]
    transitions = {(s, "a"): {s: 1} for s in states}
    aut = ProbAutomaton.from_tables(
        "big", states, ["a"], states[0], transitions, [], priority={s: 0 for s in states}
    )
    with pytest.raises(AutomatonError):
        parity_value1(aut)


def test_parity_subset_automata_shapes():
    aut = parity_two_state()
    finite, product = parity_subset_automata(aut, (aut.state_index("f"),))
    assert finite.final == {aut.state_index("f")}
    tracker = min_priority_tracker(aut)
    assert product.n == aut.n * len(tracker.states)
    # Initial mass sits on (f, priority(f)) only.
    assert product.initial.support() == (product.states.index("f,0"),)


def test_parity_records_are_audited():
    result = parity_value1(parity_all_odd())
    assert len(result.records) == 3  # {s}, {f}, {s,f}
    assert all(not rec.uncertified for rec in result.records)


# -- fixture library ----------------------------------------------------------


def test_fixture_library_names_are_stable():
    names = set(fixture_library())
    assert {
        "fig1_x1-4",
        "fig1_x1-2",
        "fig1_x3-4",
        "fig2",
        "two_state_loop",
        "half_split",
        "det_chain",
        "det_cycle",
        "parity_even",
        "parity_odd",
        "parity_two_state",
    } <= names


def test_fig1_rejects_degenerate_loop_probability():
    with pytest.raises(AutomatonError):
        fig1(0)
    with pytest.raises(AutomatonError):
        fig1(1)


# -- closure of leaktightness under the constructions ---------------------------


def test_leaktight_closed_under_constructions_on_random_pairs():
    rng = random.Random(606)
    found = 0
    while found < 8:
        a = random_automaton(rng, n_states=rng.randint(2, 3))
        b = random_automaton(rng, n_states=rng.randint(2, 3))
        if not (is_leaktight(a)[0] and is_leaktight(b)[0]):
            continue
        found += 1
        assert is_leaktight(parallel_compose(a, b))[0]
        assert is_leaktight(synchronized_product(a, b))[0]
        assert is_leaktight(transducer_compose(a, random_transducer(rng, a)))[0]
