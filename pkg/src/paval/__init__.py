"""paval: value-1 analysis for probabilistic automata.

The library decides the value-1 problem by saturating the extended Markov
monoid of an automaton: a value-1 witness proves value 1, absence of a leak
witness certifies the automaton leaktight (and then refutes value 1), and a
leak witness means the algebra is inconclusive.  An exact quantitative oracle
cross-validates positive verdicts on concrete word families.
"""

from .automaton import (
    AutomatonError,
    DeterministicTransducer,
    Distribution,
    ProbAutomaton,
    TransitionMatrix,
    parallel_compose,
    synchronized_product,
    transducer_compose,
)
from .decide import (
    ClosureStats,
    Outcome,
    ParityReductionResult,
    SubsetRecord,
    Verdict,
    decide,
    is_hierarchical,
    is_leaktight,
    min_priority_tracker,
    parity_value1,
    verify_rank,
)
from .fileformat import FormatError, format_automaton, load_automaton, parse_automaton
from .limitwords import (
    DerivationTree,
    ExtendedLimitWord,
    LimitWord,
    NotIdempotentError,
    evaluate_tree,
    parse_expression,
)
from .monoid import (
    BudgetError,
    DEFAULT_BUDGET,
    MonoidClosure,
    WitnessReport,
    export_closure_dot,
    find_leak_witness,
    find_non_simplicity_witness,
    find_value1_witness,
    iter_leak_witnesses,
    j_below,
    limit_word_dot,
    saturate,
)
from .oracle import (
    ConvergenceProbe,
    ProbeSample,
    WordBudgetError,
    WordFamily,
    eval_family,
    evaluate_word,
    min_transition_probability,
    parse_family,
    probe_value1,
    synthesize_word,
)
from . import fixtures

__version__ = "0.1.0"

__all__ = [
    "AutomatonError",
    "BudgetError",
    "ClosureStats",
    "ConvergenceProbe",
    "DEFAULT_BUDGET",
    "DerivationTree",
    "DeterministicTransducer",
    "Distribution",
    "ExtendedLimitWord",
    "FormatError",
    "LimitWord",
    "MonoidClosure",
    "NotIdempotentError",
    "Outcome",
    "ParityReductionResult",
    "ProbAutomaton",
    "ProbeSample",
    "SubsetRecord",
    "TransitionMatrix",
    "Verdict",
    "WitnessReport",
    "WordBudgetError",
    "WordFamily",
    "decide",
    "eval_family",
    "evaluate_tree",
    "evaluate_word",
    "export_closure_dot",
    "find_leak_witness",
    "find_non_simplicity_witness",
    "find_value1_witness",
    "fixtures",
    "format_automaton",
    "iter_leak_witnesses",
    "is_hierarchical",
    "is_leaktight",
    "j_below",
    "limit_word_dot",
    "load_automaton",
    "min_priority_tracker",
    "min_transition_probability",
    "parallel_compose",
    "parity_value1",
    "parse_automaton",
    "parse_expression",
    "parse_family",
    "probe_value1",
    "saturate",
    "synchronized_product",
    "synthesize_word",
    "transducer_compose",
    "verify_rank",
]
