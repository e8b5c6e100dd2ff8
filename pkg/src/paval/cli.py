"""Command-line front end.

Exit codes: 0 means the analysis completed (whatever the verdict), 2 means
the input failed to parse or read, 3 means a closure or word budget was
exceeded, 1 is any other operational error.  Output is byte-identical across
repeated runs on the same input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .automaton import AutomatonError, parallel_compose, synchronized_product
from .decide import (
    Outcome,
    decide,
    is_hierarchical,
    is_leaktight,
    parity_value1,
    witness_dict,
)
from .fileformat import FormatError, format_automaton, load_automaton
from .monoid import (
    DEFAULT_BUDGET,
    BudgetError,
    export_closure_dot,
    saturate,
)
from .oracle import (
    ConvergenceProbe,
    WordBudgetError,
    WordFamily,
    eval_family,
    evaluate_word,
    probe_value1,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3

EXPRESSION_HELP = """\
Witness expressions form a round-trippable grammar over the input letters:
  expr := iter(expr) | concat(expr,expr) | eps | LETTER
where eps is the empty word and iter pumps an idempotent.  Family expressions
for `eval --family` use:  item := atom [^ exponent],  atom := LETTER | (items),
exponent := INT | n | INT^n,  e.g.  "(b a^n)^(2^n) b".
"""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except (FormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (BudgetError, WordBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AutomatonError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paval",
        description="Value-1 analysis for probabilistic automata",
        epilog=EXPRESSION_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value1", help="three-way value-1 verdict")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--probe", action="store_true", help="append a convergence table")
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--tolerance", type=float, default=1e-3)
    p.add_argument("--report", help="write a JSON report (plus CSV/PNG for probes)")
    p.set_defaults(run=cmd_value1)

    p = sub.add_parser("leaktight", help="certify absence of leaks")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--report")
    p.set_defaults(run=cmd_leaktight)

    p = sub.add_parser("hierarchical", help="search for a witnessing rank function")
    p.add_argument("file")
    p.add_argument("--report")
    p.set_defaults(run=cmd_hierarchical)

    p = sub.add_parser("eval", help="acceptance probability of a word or family")
    p.add_argument("file")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--word", help="letters, space-separated or dense")
    group.add_argument("--family", help='family expression, e.g. "(b a^n)^(2^n) b"')
    p.add_argument("--n", default=None, help="pump indices: N or N,M,... (family only)")
    p.add_argument("--mode", choices=["auto", "exact", "float"], default="auto")
    p.add_argument("--report")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("monoid", help="saturate and list the monoid elements")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--dot", metavar="DIR", help="export one DOT file per element")
    p.add_argument("--report")
    p.set_defaults(run=cmd_monoid)

    p = sub.add_parser("compose", help="compose automata")
    p.add_argument("files", nargs="+")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--parallel", action="store_true")
    group.add_argument("--product", action="store_true")
    p.add_argument("--output", help="write the composed automaton here instead of stdout")
    p.set_defaults(run=cmd_compose)

    p = sub.add_parser("parity", help="value 1 for parity acceptance")
    p.add_argument("file")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--report")
    p.set_defaults(run=cmd_parity)

    return parser


def _write_report(path: str, doc: dict) -> None:
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write_probe_files(report_path: str, probe: ConvergenceProbe) -> None:
    base = Path(report_path)
    base.with_suffix(".csv").write_text(
        "\n".join(probe.csv_lines()) + "\n", encoding="utf-8"
    )
    from .plotting import render_probe

    render_probe(probe, base.with_suffix(".png"))


def _probe_dict(probe: ConvergenceProbe) -> dict:
    return {
        "description": probe.description,
        "tolerance": probe.tolerance,
        "verdict": probe.verdict,
        "strictly_increasing": probe.strictly_increasing,
        "samples": [
            {
                "n": s.n,
                "word_length": s.word_length,
                "acceptance": f"{float(s.value):.12g}",
                "mode": s.mode,
            }
            for s in probe.samples
        ],
    }


def cmd_value1(args) -> int:
    aut = load_automaton(args.file)
    verdict = decide(aut, budget=args.budget)
    for line in verdict.lines(aut):
        print(line)
    probe = None
    if args.probe:
        if verdict.outcome is Outcome.VALUE1_TRUE:
            probe = probe_value1(
                aut, verdict.witness, n_max=args.n_max, tolerance=args.tolerance
            )
            for line in probe.csv_lines():
                print(line)
            print(f"probe verdict: {probe.verdict}")
            print(
                "probe trend: "
                + ("strictly increasing" if probe.strictly_increasing else "not monotone")
            )
        else:
            print("probe: skipped (no value-1 witness)")
    if args.report:
        doc = {"command": "value1", "file": args.file, **verdict.to_dict(aut)}
        if probe is not None:
            doc["probe"] = _probe_dict(probe)
        _write_report(args.report, doc)
        if probe is not None:
            _write_probe_files(args.report, probe)
    return EXIT_OK


def cmd_leaktight(args) -> int:
    aut = load_automaton(args.file)
    ok, leak = is_leaktight(aut, budget=args.budget)
    print(f"leaktight {'true' if ok else 'false'}")
    if leak is not None:
        r, q = leak.state_names(aut)
        print(f"leak=(r={r},q={q}) witness={leak.trees[0].expression()}")
    if args.report:
        doc = {"command": "leaktight", "file": args.file, "leaktight": ok}
        if leak is not None:
            doc["witness"] = witness_dict(leak, aut)
        _write_report(args.report, doc)
    return EXIT_OK


def cmd_hierarchical(args) -> int:
    aut = load_automaton(args.file)
    rank = is_hierarchical(aut)
    print(f"hierarchical {'true' if rank is not None else 'false'}")
    if rank is not None:
        print("rank " + " ".join(f"{s}={rank[s]}" for s in aut.states))
    if args.report:
        doc = {
            "command": "hierarchical",
            "file": args.file,
            "hierarchical": rank is not None,
            "rank": rank,
        }
        _write_report(args.report, doc)
    return EXIT_OK


def _split_word(text: str, alphabet) -> list[str]:
    tokens = text.split()
    if all(t in alphabet for t in tokens):
        return tokens
    if len(tokens) == 1 and all(len(a) == 1 for a in alphabet):
        letters = list(tokens[0])
        if all(c in alphabet for c in letters):
            return letters
    raise AutomatonError(f"word {text!r} is not over the alphabet {tuple(alphabet)}")


def _parse_indices(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part]


def cmd_eval(args) -> int:
    aut = load_automaton(args.file)
    if args.word is not None:
        word = _split_word(args.word, aut.alphabet)
        value, used = evaluate_word(aut, word, mode=args.mode, length=len(word))
        print(value if used == "exact" else f"{value:.12g}")
        if args.report:
            _write_report(
                args.report,
                {
                    "command": "eval",
                    "file": args.file,
                    "word": word,
                    "acceptance": str(value) if used == "exact" else f"{value:.12g}",
                    "mode": used,
                },
            )
        return EXIT_OK
    if args.n is None:
        raise AutomatonError("--family needs --n")
    family = WordFamily.from_text(args.family)
    probe = eval_family(aut, family, _parse_indices(args.n), mode=args.mode)
    for line in probe.csv_lines():
        print(line)
    if args.report:
        doc = {
            "command": "eval",
            "file": args.file,
            "family": family.description,
            "probe": _probe_dict(probe),
        }
        _write_report(args.report, doc)
        _write_probe_files(args.report, probe)
    return EXIT_OK


def cmd_monoid(args) -> int:
    aut = load_automaton(args.file)
    closure = saturate(aut, budget=args.budget)
    print(f"elements {len(closure)}")
    print(f"max_sharp_height {closure.max_sharp_height}")
    for i, tree in enumerate(closure.trees):
        print(f"{i}\t{tree.sharp_height}\t{tree.expression()}")
    if args.dot:
        names = export_closure_dot(closure, args.dot)
        print(f"wrote {len(names)} files to {args.dot}")
    if args.report:
        _write_report(
            args.report,
            {
                "command": "monoid",
                "file": args.file,
                "elements": len(closure),
                "max_sharp_height": closure.max_sharp_height,
                "expressions": [t.expression() for t in closure.trees],
            },
        )
    return EXIT_OK


def cmd_compose(args) -> int:
    automata = [load_automaton(f) for f in args.files]
    if args.parallel:
        composed = parallel_compose(*automata)
    else:
        if len(automata) != 2:
            raise AutomatonError("--product composes exactly two automata")
        composed = synchronized_product(automata[0], automata[1])
    text = format_automaton(composed)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        print(text, end="")
    return EXIT_OK


def cmd_parity(args) -> int:
    aut = load_automaton(args.file)
    result = parity_value1(aut, budget=args.budget)
    for line in result.lines():
        print(line)
    if args.report:
        _write_report(
            args.report,
            {"command": "parity", "file": args.file, **result.to_dict()},
        )
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
