"""Differential checking: run a program directly and through the translation.

The two outcomes must agree: both answers (equal once the translated
source answer is brought to administrative normal form and both sides are
reduced to their reachable part), or both faulty.  Running out of fuel on
either side is inconclusive, since divergence cannot be observed.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..sizing import DEFAULT_SIZES, SizeModel
from ..source import evaluator as se
from ..source import syntax as s
from ..source.parser import print_source
from ..target import machine as tm
from ..target.parser import print_config
from ..target.syntax import Config, canonicalize, config_equal
from ..translate import transl, translate_program

AGREE_ANSWER = "AgreeAnswer"
AGREE_FAULTY = "AgreeFaulty"
INCONCLUSIVE = "Inconclusive"
DISAGREE = "DISAGREE"

DEFAULT_K = 20


@dataclass(frozen=True)
class Verdict:
    source_outcome: se.SourceOutcome
    target_outcome: Optional[tm.TargetOutcome]
    agreement: str
    detail: str = ""
    witness: Optional[s.Expr] = None  # minimized program, set for DISAGREE only

    @property
    def ok(self) -> bool:
        return self.agreement != DISAGREE

    def to_json(self) -> dict:
        return {
            "agreement": self.agreement,
            "detail": self.detail,
            "source": outcome_json(self.source_outcome),
            "target": outcome_json(self.target_outcome) if self.target_outcome is not None else None,
            "witness": print_source(self.witness) if self.witness is not None else None,
        }


def outcome_json(o: Union[se.SourceOutcome, tm.TargetOutcome]) -> dict:
    name = type(o).__name__
    if isinstance(o, se.Answer):
        return {"outcome": name, "term": print_source(o.term)}
    if isinstance(o, tm.Answer):
        return {"outcome": name, "config": print_config(o.config)}
    if isinstance(o, (se.Faulty, tm.Faulty)):
        w = o.witness
        return {"outcome": name, "kind": o.kind,
                "witness": print_config(w) if isinstance(w, Config) else print_source(w)}
    return {"outcome": name, "steps": o.steps}


def translated_answer(a: s.Expr, model: SizeModel = DEFAULT_SIZES) -> Config:
    """Canonical heap representation of a source answer."""
    return canonicalize(tm.admin_normalize(Config({}, transl(a)), model))


def compare(src: se.SourceOutcome, tgt: tm.TargetOutcome, fuel: int,
            model: SizeModel = DEFAULT_SIZES) -> tuple[str, str]:
    if isinstance(src, se.FuelExhausted) or isinstance(tgt, tm.FuelExhausted):
        return INCONCLUSIVE, f"fuel {fuel} exhausted"
    if isinstance(src, se.Faulty) and isinstance(tgt, tm.Faulty):
        return AGREE_FAULTY, f"{src.kind} / {tgt.kind}"
    if isinstance(src, se.Answer) and isinstance(tgt, tm.Answer):
        try:
            expected = translated_answer(src.term, model)
        except (tm.AdminBudgetExceeded, ValueError) as exc:
            return DISAGREE, f"translated source answer does not normalize to an answer: {exc}"
        got = canonicalize(tgt.config)
        if config_equal(expected, got):
            return AGREE_ANSWER, ""
        return DISAGREE, f"answers differ: expected {print_config(expected)}, got {print_config(got)}"
    return DISAGREE, f"source {type(src).__name__}, target {type(tgt).__name__}"


def differential_check(e: s.Expr, fuel: int = 5000, k: int = DEFAULT_K,
                       model: SizeModel = DEFAULT_SIZES, shrink_witness: bool = True) -> Verdict:
    src = se.run_source(e, fuel, model, keep_trace=False).outcome
    if isinstance(src, se.FuelExhausted):
        # the verdict is inconclusive whatever the target does; skip the
        # (possibly long) target run
        return Verdict(src, None, INCONCLUSIVE, f"source fuel {fuel} exhausted")
    tgt = tm.run_target(translate_program(e), k * fuel, model, keep_trace=False).outcome
    agreement, detail = compare(src, tgt, k * fuel if isinstance(tgt, tm.FuelExhausted) else fuel, model)
    witness = None
    if agreement == DISAGREE:
        witness = shrink(e, fuel, k, model) if shrink_witness else e
    return Verdict(src, tgt, agreement, detail, witness)


# ---------------------------------------------------------------- shrinking

def _candidates(e: s.Expr):
    """Terms one structural edit smaller than ``e``."""
    unit = s.Record(())
    if e != unit:
        yield unit
    yield from s.children(e)
    if isinstance(e, s.Letrec):
        for i in range(len(e.defs)):
            yield s.Letrec(e.defs[:i] + e.defs[i + 1:], e.body)
        for i, d in enumerate(e.defs):
            if d.size is not None:
                yield s.Letrec(e.defs[:i] + (s.Def(d.var, None, d.rhs),) + e.defs[i + 1:], e.body)
            for c in _candidates(d.rhs):
                yield s.Letrec(e.defs[:i] + (s.Def(d.var, d.size, c),) + e.defs[i + 1:], e.body)
        for c in _candidates(e.body):
            yield s.Letrec(e.defs, c)
        return
    kids = s.children(e)
    for i, kid in enumerate(kids):
        for c in _candidates(kid):
            yield _replace_child(e, i, c)


def _replace_child(e, i, new):
    counter = iter(range(len(s.children(e))))
    return s.map_children(e, lambda c: new if next(counter) == i else c)


def _still_disagrees(e: s.Expr, fuel: int, k: int, model: SizeModel) -> bool:
    if s.free_vars(e) or s.check_wellformed(e):
        return False
    return differential_check(e, fuel, k, model, shrink_witness=False).agreement == DISAGREE


def shrink(e: s.Expr, fuel: int = 5000, k: int = DEFAULT_K, model: SizeModel = DEFAULT_SIZES,
           max_rounds: int = 200) -> s.Expr:
    """Greedy structural shrinking of a DISAGREE witness."""
    for _ in range(max_rounds):
        size = s.size_of_term(e)
        for c in _candidates(e):
            if s.size_of_term(c) < size and _still_disagrees(c, fuel, k, model):
                e = c
                break
        else:
            return e
    return e


def save_regression(v: Verdict, directory: Union[str, Path] = "regressions") -> Path:
    """Store a DISAGREE witness as ``<hash>.rec`` with a JSON sidecar."""
    text = print_source(v.witness) + "\n"
    name = hashlib.sha1(text.encode()).hexdigest()[:12]
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{name}.rec"
    path.write_text(text)
    sidecar = {"regression": True, "prims": s.uses_prims(v.witness), "verdict": v.to_json()}
    (d / f"{name}.expect.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return path
