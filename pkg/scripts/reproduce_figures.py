"""Replay the worked examples in corpus/ and print each reduction sequence.

    python3 scripts/reproduce_figures.py            # all examples
    python3 scripts/reproduce_figures.py even_odd   # one of them

Source examples are shown step by step together with their differential
verdict.  Target examples are shown as heap configurations.  The exit status
is nonzero if any example deviates from its sidecar.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
from pathlib import Path

from letrec_ipu.harness.corpus import check_source_file, check_target_file, load_expectation
from letrec_ipu.harness.differential import differential_check
from letrec_ipu.source import evaluator as se
from letrec_ipu.source.parser import parse_source, print_source
from letrec_ipu.target import machine as tm
from letrec_ipu.target.parser import parse_config, print_config

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# source examples first, in the order they are usually read
ORDER = [
    "fig_substitution", "fig_forward_refs_1", "fig_forward_refs_2", "fig_size_indications_1",
    "fig_size_indications_2", "even_odd", "fig_cyclic_list", "alloc_example", "alloc_mutual",
]
MAX_SHOWN = 12


def show_steps(start: str, trace: list, show) -> None:
    print(f"            {start}")
    for i, (rule, t) in enumerate(trace):
        if i == MAX_SHOWN and len(trace) > MAX_SHOWN + 1:
            print(f"            ... {len(trace) - MAX_SHOWN - 1} more steps ...")
        if i < MAX_SHOWN or i == len(trace) - 1:
            print(f"  {rule:>10}  {show(t)}")


def replay(path: Path) -> bool:
    exp = load_expectation(path) or {}
    fuel = int(exp.get("fuel", 100_000))
    print(f"== {path.name}")
    if path.suffix == ".rec":
        e = parse_source(path.read_text(), prims=bool(exp.get("prims")))
        run = se.run_source(e, fuel)
        show_steps(print_source(e), run.trace, print_source)
        print(f"  outcome: {_describe(run.outcome)}")
        print(f"  verdict: {differential_check(e, min(fuel, 10_000)).agreement}")
        res = check_source_file(path, exp)
    else:
        c = parse_config(path.read_text())
        run = tm.run_target(c, fuel)
        show_steps(print_config(c), run.trace, print_config)
        print(f"  outcome: {_describe(run.outcome)}")
        res = check_target_file(path, exp)
    for p in res.problems:
        print(f"  MISMATCH {p}")
    print()
    return res.status != "fail"


def _describe(o) -> str:
    kind = getattr(o, "kind", None)
    return type(o).__name__ + (f" {kind}" if kind else "")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="corpus file stems (default: the worked examples)")
    ap.add_argument("--json", action="store_true", help="print only a pass/fail summary as JSON")
    args = ap.parse_args()
    files = []
    for name in args.names or ORDER:
        found = sorted(CORPUS.glob(f"{name}.rec")) + sorted(CORPUS.glob(f"{name}.tgt"))
        if not found:
            ap.error(f"no corpus file named {name}")
        files += found
    quiet = contextlib.redirect_stdout(io.StringIO()) if args.json else contextlib.nullcontext()
    with quiet:
        results = {f.name: replay(f) for f in files}
    if args.json:
        print(json.dumps(results, indent=2))
    return 0 if all(results.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
