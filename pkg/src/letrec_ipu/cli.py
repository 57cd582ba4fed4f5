"""Command-line front end.

Exit codes: 0 success or expected outcome, 1 semantic failure, 2 usage or
parse error.  See ``docs/cli.md`` for the JSON output of each command.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .harness import campaign
from .harness.corpus import run_corpus
from .harness.differential import DISAGREE, differential_check, outcome_json, save_regression
from .sizing import DEFAULT_SIZES, SizeModel, check_annotation_consistency, infer_sizes
from .source import evaluator as se
from .source.parser import parse_source, print_source
from .source.syntax import SourceError, check_wellformed
from .target import machine as tm
from .target.parser import TargetSyntaxError, parse_config, print_config, print_target
from .translate import translate_program

OK, FAILURE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fuel", type=int, default=100_000, help="step budget (default 100000)")
    p.add_argument("--prims", action="store_true", help="enable naturals, booleans and if")
    p.add_argument("--seed", type=int, default=0, help="random seed for generated programs")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--sizing", metavar="FILE", help="size model (key = value lines)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="letrec-ipu", description="letrec with in-place update workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a .rec program")
    p.add_argument("file")
    p = sub.add_parser("compile", help="translate a .rec program to .tgt")
    p.add_argument("file")
    p.add_argument("--output", "-o", help="write here instead of stdout")
    p = sub.add_parser("exec", help="run a .tgt expression or configuration")
    p.add_argument("file")
    p = sub.add_parser("trace", help="print every step of a run")
    p.add_argument("file")
    p.add_argument("--translated", action="store_true", help="trace the translation of a .rec program")
    p = sub.add_parser("check", help="differential check of one .rec program")
    p.add_argument("file")
    p.add_argument("--k", type=int, default=20, help="target fuel multiplier (default 20)")
    p = sub.add_parser("fuzz", help="differential campaign over generated programs")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--mixed", action="store_true", help="alternate prims on and off")
    p.add_argument("--fault-rate", type=float, default=0.2)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--regressions", default="regressions", help="where DISAGREE witnesses go")
    p = sub.add_parser("corpus", help="run a directory of programs with .expect.json sidecars")
    p.add_argument("path")
    p = sub.add_parser("infer-sizes", help="fill in size annotations of a .rec program")
    p.add_argument("file")
    p.add_argument("--output", "-o")
    for name in sub.choices:
        _common(sub.choices[name])
    # fuzz uses the per-case budget of the desk-scale campaign unless told otherwise
    sub.choices["fuzz"].set_defaults(fuel=5000)
    return ap


def main(argv: Optional[list] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        model = SizeModel.from_file(args.sizing) if args.sizing else DEFAULT_SIZES
        return COMMANDS[args.command](args, model)
    except (SourceError, TargetSyntaxError, UsageError, OSError, ValueError) as exc:
        _err(f"error: {exc}")
        return USAGE


# ---------------------------------------------------------------- helpers

def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(args, data: dict, text: str) -> None:
    print(json.dumps(data, indent=2) if args.json else text)


def _read(path: str) -> str:
    return Path(path).read_text()


def _load_source(args, check: bool = True):
    e = parse_source(_read(args.file), prims=args.prims, check=check)
    if check:
        diags = check_wellformed(e, args.prims)
        if diags:
            raise SourceError(diags)
    return e


def _outcome_text(o) -> str:
    if isinstance(o, se.Answer):
        return print_source(o.term)
    if isinstance(o, tm.Answer):
        return print_config(o.config)
    if isinstance(o, (se.Faulty, tm.Faulty)):
        w = o.witness
        shown = print_config(w) if isinstance(w, tm.Config) else print_source(w)
        return f"Faulty {o.kind}\n{shown}"
    return f"FuelExhausted after {o.steps} steps"


def _exit_for(o) -> int:
    # sidecar expectations are the corpus command's business; a single run only reports
    return OK if isinstance(o, (se.Answer, tm.Answer)) else FAILURE


# ---------------------------------------------------------------- commands

def cmd_run(args, model) -> int:
    e = _load_source(args)
    run = se.run_source(e, args.fuel, model, keep_trace=False)
    _emit(args, {"steps": run.steps, **outcome_json(run.outcome)}, _outcome_text(run.outcome))
    return _exit_for(run.outcome)


def cmd_compile(args, model) -> int:
    text = print_target(translate_program(_load_source(args)).expr)
    if args.output:
        Path(args.output).write_text(text + "\n")
    if args.json:
        print(json.dumps({"target": text, "output": args.output}, indent=2))
    elif not args.output:
        print(text)
    return OK


def cmd_exec(args, model) -> int:
    c = parse_config(_read(args.file))
    run = tm.run_target(c, args.fuel, model, keep_trace=False)
    _emit(args, {"steps": run.steps, **outcome_json(run.outcome)}, _outcome_text(run.outcome))
    return _exit_for(run.outcome)


def cmd_trace(args, model) -> int:
    if args.file.endswith(".tgt") or args.translated:
        c = parse_config(_read(args.file)) if args.file.endswith(".tgt") else translate_program(_load_source(args))
        run = tm.run_target(c, args.fuel, model)
        start, show, kind = c, print_config, "target"
    else:
        e = _load_source(args)
        run = se.run_source(e, args.fuel, model)
        start, show, kind = e, print_source, "source"
    if args.json:
        steps = [{"step": i, "rule": r, "term": show(t)} for i, (r, t) in enumerate(run.trace, 1)]
        print(json.dumps({"calculus": kind, "initial": show(start), "steps": steps,
                          "result": outcome_json(run.outcome)}, indent=2))
    else:
        print(f"INIT\n{show(start)}")
        for i, (r, t) in enumerate(run.trace, 1):
            print(f"STEP {i} RULE {r}\n{show(t)}")
        print(f"RESULT {type(run.outcome).__name__}" + (f" {run.outcome.kind}" if hasattr(run.outcome, "kind") else ""))
    return _exit_for(run.outcome)


def cmd_check(args, model) -> int:
    e = _load_source(args)
    v = differential_check(e, args.fuel, args.k, model)
    saved = None
    if v.agreement == DISAGREE:
        saved = str(save_regression(v))
    data = {**v.to_json(), "saved": saved}
    lines = [v.agreement + (f": {v.detail}" if v.detail else "")]
    if saved:
        lines.append(f"witness saved to {saved}")
    _emit(args, data, "\n".join(lines))
    return FAILURE if v.agreement == DISAGREE else OK


def cmd_fuzz(args, model) -> int:
    cfg = campaign.CampaignConfig(
        count=args.count, seed=args.seed, prims=None if args.mixed else args.prims,
        fault_rate=args.fault_rate, fuel=args.fuel, k=args.k, jobs=args.jobs,
        regressions=args.regressions,
    )
    report = campaign.run_campaign(cfg, model)
    _emit(args, report.to_json(), report.text())
    return OK if report.ok else FAILURE


def cmd_corpus(args, model) -> int:
    if not Path(args.path).exists():
        raise UsageError(f"{args.path} does not exist")
    report = run_corpus(args.path, model)
    _emit(args, report.to_json(), report.text())
    return OK if report.ok else FAILURE


def cmd_infer_sizes(args, model) -> int:
    e = _load_source(args, check=False)
    annotated, diags = infer_sizes(e, model)
    diags = diags + check_wellformed(annotated, args.prims) + check_annotation_consistency(annotated, model)
    text = print_source(annotated)
    if args.output:
        Path(args.output).write_text(text + "\n")
    data = {"program": text, "diagnostics": [str(d) for d in diags], "output": args.output}
    _emit(args, data, "\n".join([text] * (not args.output) + [str(d) for d in diags]))
    return FAILURE if diags else OK


COMMANDS = {
    "run": cmd_run, "compile": cmd_compile, "exec": cmd_exec, "trace": cmd_trace,
    "check": cmd_check, "fuzz": cmd_fuzz, "corpus": cmd_corpus, "infer-sizes": cmd_infer_sizes,
}


if __name__ == "__main__":
    sys.exit(main())
