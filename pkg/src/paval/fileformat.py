"""Line-oriented text format for automata.

::

    automaton fig1
    alphabet a b
    states 0 L1 R1 L2 R2
    initial 0              # or: initial 0:1/2 R1:1/2
    final L2
    priority 0:1 L1:2 ...  # optional; when present it must cover every state
    trans 0  b L1:1/2 R1:1/2
    ...

Probabilities are written "p/q" or as integer literals.  '#' starts a comment.
Every (state, letter) pair must appear exactly once and every row must sum to
exactly 1.
"""

from __future__ import annotations

from fractions import Fraction

from .automaton import (
    AutomatonError,
    Distribution,
    ProbAutomaton,
    TransitionMatrix,
    ZERO,
)


class FormatError(ValueError):
    """Malformed automaton text; carries the 1-based line (and column if known)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


def _column_of(raw_line: str, token: str) -> int | None:
    pos = raw_line.find(token)
    return pos + 1 if pos >= 0 else None


def _parse_fraction(token: str, lineno: int, raw: str) -> Fraction:
    try:
        if "/" in token:
            num, den = token.split("/", 1)
            value = Fraction(int(num), int(den))
        else:
            value = Fraction(int(token))
    except (ValueError, ZeroDivisionError):
        raise FormatError(
            f"bad probability literal {token!r}", lineno, _column_of(raw, token)
        ) from None
    if value < 0 or value > 1:
        raise FormatError(
            f"probability {token!r} outside [0, 1]", lineno, _column_of(raw, token)
        )
    return value


def _parse_weight_pair(token: str, lineno: int, raw: str) -> tuple[str, Fraction]:
    if ":" not in token:
        raise FormatError(
            f"expected name:prob, found {token!r}", lineno, _column_of(raw, token)
        )
    name, prob = token.rsplit(":", 1)
    if not name:
        raise FormatError(f"empty name in {token!r}", lineno, _column_of(raw, token))
    return name, _parse_fraction(prob, lineno, raw)


def _check_name(token: str, lineno: int, raw: str) -> str:
    if ":" in token or "#" in token:
        raise FormatError(
            f"name {token!r} may not contain ':' or '#'",
            lineno,
            _column_of(raw, token),
        )
    return token


def parse_automaton(text: str) -> ProbAutomaton:
    """Parse the text format into a validated automaton.

    Reports syntax errors with line/column, incomplete transition tables,
    rows not summing to 1, unknown states or letters, and duplicates.
    """
    name: str | None = None
    alphabet: list[str] | None = None
    states: list[str] | None = None
    state_index: dict[str, int] = {}
    initial_pairs: dict[int, Fraction] | None = None
    final_names: list[str] | None = None
    priority: dict[int, int] = {}
    priority_seen = False
    rows: dict[tuple[int, int], tuple[Fraction, ...]] = {}

    def need_header(lineno: int) -> None:
        if alphabet is None or states is None:
            raise FormatError(
                "alphabet and states must be declared first", lineno
            )

    def state_of(token: str, lineno: int, raw: str) -> int:
        if token not in state_index:
            raise FormatError(
                f"unknown state {token!r}", lineno, _column_of(raw, token)
            )
        return state_index[token]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]

        if kind == "automaton":
            if name is not None:
                raise FormatError("duplicate automaton line", lineno)
            if len(args) != 1:
                raise FormatError("automaton line needs exactly one name", lineno)
            name = args[0]
        elif kind == "alphabet":
            if alphabet is not None:
                raise FormatError("duplicate alphabet line", lineno)
            if not args:
                raise FormatError("alphabet line needs at least one letter", lineno)
            seen: set[str] = set()
            for tok in args:
                _check_name(tok, lineno, raw)
                if tok in seen:
                    raise FormatError(
                        f"duplicate letter {tok!r}", lineno, _column_of(raw, tok)
                    )
                seen.add(tok)
            alphabet = list(args)
        elif kind == "states":
            if states is not None:
                raise FormatError("duplicate states line", lineno)
            if not args:
                raise FormatError("states line needs at least one state", lineno)
            for tok in args:
                _check_name(tok, lineno, raw)
                if tok in state_index:
                    raise FormatError(
                        f"duplicate state {tok!r}", lineno, _column_of(raw, tok)
                    )
                state_index[tok] = len(state_index)
            states = list(args)
        elif kind == "initial":
            need_header(lineno)
            if initial_pairs is not None:
                raise FormatError("duplicate initial line", lineno)
            if not args:
                raise FormatError("initial line needs at least one state", lineno)
            initial_pairs = {}
            if len(args) == 1 and ":" not in args[0]:
                initial_pairs[state_of(args[0], lineno, raw)] = Fraction(1)
            else:
                for tok in args:
                    s, w = _parse_weight_pair(tok, lineno, raw)
                    idx = state_of(s, lineno, raw)
                    if idx in initial_pairs:
                        raise FormatError(
                            f"duplicate initial weight for {s!r}",
                            lineno,
                            _column_of(raw, tok),
                        )
                    initial_pairs[idx] = w
        elif kind == "final":
            need_header(lineno)
            if final_names is not None:
                raise FormatError("duplicate final line", lineno)
            final_names = []
            for tok in args:
                state_of(tok, lineno, raw)
                if tok in final_names:
                    raise FormatError(
                        f"duplicate final state {tok!r}", lineno, _column_of(raw, tok)
                    )
                final_names.append(tok)
        elif kind == "priority":
            need_header(lineno)
            priority_seen = True
            for tok in args:
                s, _ = tok.rsplit(":", 1) if ":" in tok else (tok, "")
                if ":" not in tok:
                    raise FormatError(
                        f"expected state:priority, found {tok!r}",
                        lineno,
                        _column_of(raw, tok),
                    )
                idx = state_of(s, lineno, raw)
                value = tok.rsplit(":", 1)[1]
                try:
                    p = int(value)
                except ValueError:
                    raise FormatError(
                        f"bad priority {value!r}", lineno, _column_of(raw, tok)
                    ) from None
                if p < 0:
                    raise FormatError(
                        f"priority must be nonnegative, got {p}",
                        lineno,
                        _column_of(raw, tok),
                    )
                if idx in priority:
                    raise FormatError(
                        f"duplicate priority for {s!r}", lineno, _column_of(raw, tok)
                    )
                priority[idx] = p
        elif kind == "trans":
            need_header(lineno)
            if len(args) < 3:
                raise FormatError(
                    "trans line needs: trans STATE LETTER target:prob ...", lineno
                )
            src = state_of(args[0], lineno, raw)
            letter = args[1]
            if letter not in alphabet:
                raise FormatError(
                    f"unknown letter {letter!r}", lineno, _column_of(raw, letter)
                )
            key = (src, alphabet.index(letter))
            if key in rows:
                raise FormatError(
                    f"duplicate trans row for ({args[0]!r}, {letter!r})", lineno
                )
            row = [ZERO] * len(states)
            total = ZERO
            for tok in args[2:]:
                t, w = _parse_weight_pair(tok, lineno, raw)
                idx = state_of(t, lineno, raw)
                if row[idx] != 0:
                    raise FormatError(
                        f"duplicate target {t!r} in row", lineno, _column_of(raw, tok)
                    )
                row[idx] = w
                total += w
            if total != 1:
                raise FormatError(
                    f"row for ({args[0]!r}, {letter!r}) sums to {total}, not 1",
                    lineno,
                )
            rows[key] = tuple(row)
        else:
            raise FormatError(
                f"unknown directive {kind!r}", lineno, _column_of(raw, kind)
            )

    if name is None:
        raise FormatError("missing automaton line")
    if alphabet is None:
        raise FormatError("missing alphabet line")
    if states is None:
        raise FormatError("missing states line")
    if initial_pairs is None:
        raise FormatError("missing initial line")
    if final_names is None:
        raise FormatError("missing final line")

    missing = [
        (s, a)
        for si, s in enumerate(states)
        for ai, a in enumerate(alphabet)
        if (si, ai) not in rows
    ]
    if missing:
        listed = ", ".join(f"({s!r}, {a!r})" for s, a in missing[:4])
        more = "" if len(missing) <= 4 else f" and {len(missing) - 4} more"
        raise FormatError(f"incomplete transition table: missing {listed}{more}")

    prio: tuple[int, ...] | None = None
    if priority_seen:
        missing_prio = [s for i, s in enumerate(states) if i not in priority]
        if missing_prio:
            raise FormatError(
                f"priority present but not total: missing {missing_prio}"
            )
        prio = tuple(priority[i] for i in range(len(states)))

    n = len(states)
    matrices = tuple(
        TransitionMatrix(tuple(rows[(si, ai)] for si in range(n)))
        for ai in range(len(alphabet))
    )
    try:
        return ProbAutomaton(
            name=name,
            states=tuple(states),
            alphabet=tuple(alphabet),
            initial=Distribution.from_pairs(n, initial_pairs),
            matrices=matrices,
            final=frozenset(state_index[f] for f in final_names),
            priority=prio,
        )
    except AutomatonError as exc:
        raise FormatError(str(exc)) from exc


def format_automaton(aut: ProbAutomaton) -> str:
    """Serialize back to the text format; parse(format(a)) == a."""
    lines = [f"automaton {aut.name}"]
    lines.append("alphabet " + " ".join(aut.alphabet))
    lines.append("states " + " ".join(aut.states))
    support = aut.initial.support()
    if len(support) == 1 and aut.initial[support[0]] == 1:
        lines.append(f"initial {aut.states[support[0]]}")
    else:
        lines.append(
            "initial "
            + " ".join(f"{aut.states[s]}:{aut.initial[s]}" for s in support)
        )
    lines.append("final " + " ".join(aut.states[i] for i in sorted(aut.final)))
    if aut.priority is not None:
        lines.append(
            "priority "
            + " ".join(f"{s}:{p}" for s, p in zip(aut.states, aut.priority))
        )
    for letter, matrix in zip(aut.alphabet, aut.matrices):
        for si, state in enumerate(aut.states):
            targets = " ".join(
                f"{aut.states[t]}:{w}"
                for t, w in enumerate(matrix.rows[si])
                if w > 0
            )
            lines.append(f"trans {state} {letter} {targets}")
    return "\n".join(lines) + "\n"


def load_automaton(path) -> ProbAutomaton:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_automaton(handle.read())
