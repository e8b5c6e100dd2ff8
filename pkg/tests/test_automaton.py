"""Core types, word operations, and composition constructions."""

import random
from fractions import Fraction

import pytest

from paval import (
    AutomatonError,
    Distribution,
    ProbAutomaton,
    TransitionMatrix,
    parallel_compose,
    synchronized_product,
    transducer_compose,
)
from paval.automaton import DeterministicTransducer
from paval.decide import min_priority_tracker
from paval.fixtures import fig1, fig2, parity_two_state, two_state_loop

from conftest import random_automaton, random_word
from oracles import path_sum_acceptance

F = Fraction


# -- distributions and matrices ----------------------------------------------


def test_distribution_must_sum_to_one():
    with pytest.raises(AutomatonError):
        Distribution((F(1, 2), F(1, 4)))
    with pytest.raises(AutomatonError):
        Distribution((F(3, 2), F(-1, 2)))


def test_distribution_support():
    d = Distribution((F(1, 2), F(0), F(1, 2)))
    assert d.support() == (0, 2)


def test_matrix_rejects_non_stochastic_rows():
    with pytest.raises(AutomatonError):
        TransitionMatrix(((F(1, 2), F(1, 4)), (F(0), F(1))))


def test_matrix_product_is_exact():
    a = TransitionMatrix(((F(1, 3), F(2, 3)), (F(1), F(0))))
    b = TransitionMatrix(((F(1, 2), F(1, 2)), (F(0), F(1))))
    ab = a @ b
    assert ab.rows[0] == (F(1, 6), F(5, 6))
    assert ab.rows[1] == (F(1, 2), F(1, 2))


# -- single steps --------------------------------------------------------------


def test_step_b_from_center_splits_evenly():
    aut = fig1(F(3, 4))
    d = aut.step(Distribution.point(5, aut.state_index("0")), "b")
    assert d[aut.state_index("L1")] == F(1, 2)
    assert d[aut.state_index("R1")] == F(1, 2)


def test_step_identity_rows_leave_distribution_unchanged():
    aut = fig1(F(3, 4))
    d = Distribution.point(5, aut.state_index("L2"))
    assert aut.step(d, "a") == d
    assert aut.step(d, "b") == d


def test_step_a_from_left_loop():
    aut = fig1(F(3, 4))
    d = aut.step(Distribution.point(5, aut.state_index("L1")), "a")
    assert d[aut.state_index("L1")] == F(3, 4)
    assert d[aut.state_index("0")] == F(1, 4)


def test_step_unknown_letter():
    aut = two_state_loop()
    with pytest.raises(AutomatonError):
        aut.step(aut.initial, "z")


@pytest.mark.parametrize("x", [F(1, 3), F(3, 4), F(9, 10)])
def test_loop_reach_probabilities_match_formula(x):
    # After b a^n the two loop states hold x^n/2 and (1-x)^n/2 exactly.
    aut = fig1(x)
    for n in range(11):
        d = aut.distribution_after(["b"] + ["a"] * n)
        assert d[aut.state_index("L1")] == x**n / 2
        assert d[aut.state_index("R1")] == (1 - x) ** n / 2


# -- acceptance -----------------------------------------------------------------


def test_acceptance_bab_is_three_eighths():
    aut = fig1(F(3, 4))
    word = ["b", "a", "b"]
    assert aut.acceptance_probability(word) == F(3, 8)
    assert path_sum_acceptance(aut, word) == F(3, 8)


def test_empty_word_accepts_iff_initial_is_final():
    aut = fig1(F(1, 2))
    assert aut.acceptance_probability([]) == 0
    accepting = two_state_loop().with_final(["s", "f"])
    assert accepting.acceptance_probability([]) == 1


def test_acceptance_matches_path_oracle_on_random_words():
    rng = random.Random(7)
    for _ in range(25):
        aut = random_automaton(rng, n_states=rng.randint(2, 4))
        word = random_word(rng, aut.alphabet, max_len=5)
        assert aut.acceptance_probability(word) == path_sum_acceptance(aut, word)


def test_round_family_matches_closed_form():
    from oracles import round_family_value

    x, n, rounds = F(3, 4), 4, 16
    word = (["b"] + ["a"] * n) * rounds + ["b"]
    assert fig1(x).acceptance_probability(word) == round_family_value(x, n, rounds)


# -- word matrices ---------------------------------------------------------------


def test_empty_word_matrix_is_identity():
    aut = fig1(F(1, 2))
    assert aut.transition_matrix([]) == TransitionMatrix.identity(5)


def test_single_letter_matrix():
    aut = fig1(F(1, 2))
    assert aut.transition_matrix(["a"]) == aut.letter_matrix("a")


def test_word_matrix_is_product_of_letter_matrices():
    aut = fig1(F(1, 2))
    ba = aut.transition_matrix(["b", "a"])
    assert ba == aut.letter_matrix("b") @ aut.letter_matrix("a")


def test_word_matrix_splits_multiplicatively():
    rng = random.Random(11)
    for _ in range(20):
        aut = random_automaton(rng, n_states=rng.randint(2, 5))
        u = random_word(rng, aut.alphabet, max_len=4)
        v = random_word(rng, aut.alphabet, max_len=4)
        assert aut.transition_matrix(u + v) == (
            aut.transition_matrix(u) @ aut.transition_matrix(v)
        )


def test_idempotent_words_on_fig1():
    aut = fig1(F(3, 4))
    assert aut.is_idempotent_word(["a"])
    assert not aut.is_idempotent_word(["b"])
    assert aut.is_idempotent_word([])


def test_deterministic_idempotent_word():
    from paval.fixtures import det_chain

    # Four a's send every chain state to the sink; repeating changes nothing.
    aut = det_chain(4)
    assert aut.is_idempotent_word(["a"] * 4)
    assert not aut.is_idempotent_word(["a"])


# -- parallel composition ----------------------------------------------------------


def test_parallel_self_composition_preserves_acceptance():
    aut = fig1(F(3, 4))
    par = parallel_compose(aut, aut)
    for word in (["b", "a", "b"], [], ["a", "b"]):
        assert par.acceptance_probability(word) == aut.acceptance_probability(word)


def test_parallel_accept_reject_gives_half():
    accept = ProbAutomaton.from_tables(
        "acc", ["s"], ["a"], "s", {("s", "a"): {"s": 1}}, ["s"]
    )
    reject = ProbAutomaton.from_tables(
        "rej", ["s"], ["a"], "s", {("s", "a"): {"s": 1}}, []
    )
    par = parallel_compose(accept, reject)
    assert par.acceptance_probability(["a", "a"]) == F(1, 2)
    assert par.acceptance_probability([]) == F(1, 2)


def test_parallel_average_identity_on_random_inputs():
    rng = random.Random(23)
    for _ in range(10):
        a = random_automaton(rng, n_states=3)
        b = random_automaton(rng, n_states=3)
        par = parallel_compose(a, b)
        word = random_word(rng, a.alphabet, max_len=6)
        assert par.acceptance_probability(word) == (
            a.acceptance_probability(word) + b.acceptance_probability(word)
        ) / 2


def test_nary_parallel_enters_each_copy_with_one_over_n():
    rng = random.Random(5)
    parts = [random_automaton(rng, n_states=2) for _ in range(5)]
    par = parallel_compose(*parts)
    assert par.n == sum(p.n for p in parts)
    for w in par.initial.weights:
        assert w == 0 or w in (F(1, 5), F(1, 5) * 1)
    assert sum(par.initial.weights) == 1
    word = random_word(rng, parts[0].alphabet, max_len=5)
    expected = sum(p.acceptance_probability(word) for p in parts) / 5
    assert par.acceptance_probability(word) == expected


def test_parallel_alphabet_mismatch():
    a = two_state_loop()
    b = fig1(F(1, 2))
    with pytest.raises(AutomatonError):
        parallel_compose(a, b)


def test_parallel_prefixes_disambiguate_state_names():
    aut = two_state_loop()
    par = parallel_compose(aut, aut)
    assert par.states == ("A.s", "A.f", "B.s", "B.f")


# -- synchronized product --------------------------------------------------------


def one_state(name="unit", final=True):
    return ProbAutomaton.from_tables(
        name, ["u"], ["a", "b"], "u",
        {("u", "a"): {"u": 1}, ("u", "b"): {"u": 1}},
        ["u"] if final else [],
    )


def test_product_with_one_state_is_isomorphic():
    aut = fig1(F(1, 2))
    prod = synchronized_product(aut, one_state())
    assert prod.n == aut.n
    for word in (["b", "a", "b"], ["a"], []):
        assert prod.acceptance_probability(word) == aut.acceptance_probability(word)


def test_product_of_deterministic_is_deterministic():
    rng = random.Random(3)
    from conftest import random_deterministic

    a = random_deterministic(rng, n_states=3)
    b = random_deterministic(rng, n_states=2)
    prod = synchronized_product(a, b)
    for m in prod.matrices:
        for row in m.rows:
            assert sum(1 for w in row if w > 0) == 1


def test_product_rows_remain_stochastic_on_random_inputs():
    # TransitionMatrix validates row sums at construction; building the
    # product at all is the algebraic identity check.
    rng = random.Random(31)
    for _ in range(10):
        a = random_automaton(rng, n_states=3)
        b = random_automaton(rng, n_states=3)
        prod = synchronized_product(a, b)
        assert prod.n == 9


# -- transducer composition -------------------------------------------------------


def test_one_state_transducer_is_neutral():
    aut = fig1(F(1, 2))
    trans = DeterministicTransducer.constant_start(
        "unit", ["m"], aut.states, {(("m"), q): "m" for q in aut.states}, "m"
    )
    comp = transducer_compose(aut, trans)
    assert comp.n == aut.n
    for word in (["b", "a", "b"], [], ["a", "a"]):
        assert comp.acceptance_probability(word) == aut.acceptance_probability(word)


def test_transducer_state_count_is_product():
    aut = fig1(F(1, 2))
    trans = DeterministicTransducer.constant_start(
        "flip",
        ["m0", "m1"],
        aut.states,
        {(m, q): ("m1" if m == "m0" else "m0") for m in ["m0", "m1"] for q in aut.states},
        "m0",
    )
    comp = transducer_compose(aut, trans)
    assert comp.n == aut.n * 2


def test_transducer_must_be_total():
    aut = two_state_loop()
    with pytest.raises(AutomatonError):
        DeterministicTransducer(
            name="partial",
            states=("m",),
            inputs=aut.states,
            delta={("m", "s"): "m"},
            start={"s": "m", "f": "m"},
        )


def test_min_priority_tracker_only_decreases():
    aut = parity_two_state()
    tracker = min_priority_tracker(aut)
    comp = transducer_compose(aut, tracker)
    # Along any positive-probability move the tracked priority cannot grow.
    for m in comp.matrices:
        for si, row in enumerate(m.rows):
            p_from = int(comp.states[si].rsplit(",", 1)[1])
            for ti, w in enumerate(row):
                if w > 0:
                    p_to = int(comp.states[ti].rsplit(",", 1)[1])
                    assert p_to <= p_from


def test_transducer_inputs_must_match_states():
    aut = two_state_loop()
    trans = DeterministicTransducer.constant_start(
        "bad", ["m"], ["x", "y"], {("m", "x"): "m", ("m", "y"): "m"}, "m"
    )
    with pytest.raises(AutomatonError):
        transducer_compose(aut, trans)


# -- structure validation ----------------------------------------------------------


def test_total_transition_table_required():
    with pytest.raises(AutomatonError):
        ProbAutomaton.from_tables(
            "partial", ["s", "t"], ["a"], "s", {("s", "a"): {"t": 1}}, []
        )


def test_priority_must_be_total():
    aut = fig2()
    with pytest.raises(AutomatonError):
        ProbAutomaton(
            name=aut.name,
            states=aut.states,
            alphabet=aut.alphabet,
            initial=aut.initial,
            matrices=aut.matrices,
            final=aut.final,
            priority=(0, 1),
        )
