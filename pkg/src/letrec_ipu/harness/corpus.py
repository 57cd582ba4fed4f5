"""Run a directory of example programs against their expectations.

Every ``name.rec`` (source) or ``name.tgt`` (target) file may come with a
``name.expect.json`` sidecar.  Recognized keys:

``prims``       parse with the primitive extension (default false)
``fuel``        step budget (default 100000)
``outcome``     ``Answer`` or ``Faulty``
``fault``       expected fault kind
``trace``       full list of rule names
``steps``       exact prefix of the trace, as ``[rule, term]`` pairs
``milestones``  terms (or configurations) that must appear in order
``answer``      the answer, modulo renaming
``answer_body`` for source answers, the value under the final binding
``verdict``     for source files, the expected differential agreement

Source terms compare with ``alpha_equal``.  Target configurations compare
with ``config_equal`` on their reachable parts.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..sizing import DEFAULT_SIZES, SizeModel
from ..source import evaluator as se
from ..source import syntax as s
from ..source.parser import parse_source, print_source
from ..target import machine as tm
from ..target.parser import parse_config, print_config
from ..target.syntax import Config, config_equal, restrict_reachable
from .differential import DISAGREE, differential_check


@dataclass
class CorpusResult:
    path: str
    status: str  # "pass", "fail" or "skip"
    problems: list = field(default_factory=list)
    outcome: str = ""
    verdict: Optional[str] = None

    def to_json(self) -> dict:
        return {"file": self.path, "status": self.status, "outcome": self.outcome,
                "verdict": self.verdict, "problems": self.problems}


@dataclass
class CorpusReport:
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.results)

    def counts(self) -> dict:
        out = {"pass": 0, "fail": 0, "skip": 0}
        for r in self.results:
            out[r.status] += 1
        return out

    def to_json(self) -> dict:
        return {"ok": self.ok, "counts": self.counts(), "results": [r.to_json() for r in self.results]}

    def text(self) -> str:
        lines = []
        for r in self.results:
            lines.append(f"{r.status.upper():4} {r.path} {r.outcome}")
            lines += [f"     {p}" for p in r.problems]
        c = self.counts()
        lines.append(f"{c['pass']} passed, {c['fail']} failed, {c['skip']} skipped")
        return "\n".join(lines)


def sidecar_path(p: Path) -> Path:
    return p.with_name(p.stem + ".expect.json")


def load_expectation(p: Path) -> Optional[dict]:
    sc = sidecar_path(p)
    if not sc.exists():
        return None
    return json.loads(sc.read_text())


def run_corpus(path, model: SizeModel = DEFAULT_SIZES) -> CorpusReport:
    root = Path(path)
    files = sorted(root.glob("*.rec")) + sorted(root.glob("*.tgt")) if root.is_dir() else [root]
    report = CorpusReport()
    for f in files:
        exp = load_expectation(f)
        if exp is None:
            warnings.warn(f"{f}: no expectation sidecar, skipped")
            report.results.append(CorpusResult(str(f), "skip", ["no sidecar"]))
            continue
        check = check_source_file if f.suffix == ".rec" else check_target_file
        report.results.append(check(f, exp, model))
    return report


def _subsequence(wanted, seen, eq) -> Optional[int]:
    """Index of the first wanted item not found in order, or None."""
    it = iter(seen)
    for i, w in enumerate(wanted):
        if not any(eq(w, x) for x in it):
            return i
    return None


def _check_common(res: CorpusResult, exp: dict, outcome, trace, parse, eq, show, answer_of):
    kind = type(outcome).__name__
    res.outcome = kind + (f" {outcome.kind}" if hasattr(outcome, "kind") else "")
    if "outcome" in exp and exp["outcome"] != kind:
        res.problems.append(f"outcome {kind}, expected {exp['outcome']}")
    if "fault" in exp and getattr(outcome, "kind", None) != exp["fault"]:
        res.problems.append(f"fault {getattr(outcome, 'kind', None)}, expected {exp['fault']}")
    rules = [r for r, _ in trace]
    if "trace" in exp and rules != exp["trace"]:
        res.problems.append(f"trace {rules}, expected {exp['trace']}")
    for i, (rule, text) in enumerate(exp.get("steps", [])):
        if i >= len(trace):
            res.problems.append(f"step {i + 1}: trace ends early")
            break
        got_rule, got = trace[i]
        if got_rule != rule or not eq(parse(text), got):
            res.problems.append(f"step {i + 1}: got {got_rule} {show(got)}, expected {rule} {text}")
            break
    if "milestones" in exp:
        miss = _subsequence([parse(m) for m in exp["milestones"]], [t for _, t in trace], eq)
        if miss is not None:
            res.problems.append(f"milestone not reached in order: {exp['milestones'][miss]}")
    if "answer" in exp:
        got = answer_of(outcome)
        if got is None or not eq(parse(exp["answer"]), got):
            res.problems.append(f"answer {show(got) if got is not None else None}, expected {exp['answer']}")


def check_source_file(f: Path, exp: dict, model: SizeModel = DEFAULT_SIZES) -> CorpusResult:
    res = CorpusResult(str(f), "pass")
    prims = bool(exp.get("prims", False))
    try:
        e = parse_source(f.read_text(), prims=prims)
    except s.SourceError as exc:
        res.status, res.problems = "fail", [str(exc)]
        return res
    diags = s.check_wellformed(e, prims)
    if diags:
        res.status, res.problems = "fail", [str(d) for d in diags]
        return res
    fuel = int(exp.get("fuel", 100_000))
    run = se.run_source(e, fuel, model)

    def parse(text):
        return parse_source(text, prims=prims)

    _check_common(res, exp, run.outcome, run.trace, parse, s.alpha_equal, print_source,
                  lambda o: o.term if isinstance(o, se.Answer) else None)
    if "answer_body" in exp:
        o = run.outcome
        body = (o.term.body if isinstance(o.term, s.Letrec) else o.term) if isinstance(o, se.Answer) else None
        if body is None or not s.alpha_equal(parse(exp["answer_body"]), body):
            res.problems.append(f"answer body {print_source(body) if body else None}, expected {exp['answer_body']}")
    if exp.get("regression"):
        # a stored witness passes once the two sides stop disagreeing
        v = differential_check(e, min(fuel, 10_000), model=model, shrink_witness=False)
        res.verdict = v.agreement
        if v.agreement == DISAGREE:
            res.problems.append(f"still disagrees: {v.detail}")
    elif "verdict" in exp:
        v = differential_check(e, min(fuel, 10_000), model=model)
        res.verdict = v.agreement
        if v.agreement != exp["verdict"]:
            res.problems.append(f"verdict {v.agreement} ({v.detail}), expected {exp['verdict']}")
    if res.problems:
        res.status = "fail"
    return res


def _config_eq(c1: Config, c2: Config) -> bool:
    return config_equal(restrict_reachable(c1), restrict_reachable(c2))


def check_target_file(f: Path, exp: dict, model: SizeModel = DEFAULT_SIZES) -> CorpusResult:
    res = CorpusResult(str(f), "pass")
    try:
        c = parse_config(f.read_text())
    except ValueError as exc:
        res.status, res.problems = "fail", [str(exc)]
        return res
    run = tm.run_target(c, int(exp.get("fuel", 100_000)), model)
    _check_common(res, exp, run.outcome, run.trace, parse_config, _config_eq, print_config,
                  lambda o: o.config if isinstance(o, tm.Answer) else None)
    if res.problems:
        res.status = "fail"
    return res
