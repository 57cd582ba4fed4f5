"""Drivers for the semantic properties: strong commutation of the target
rules, coherence of the two size functions, and generators of reachable
states for both calculi."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterator, Optional

from ..sizing import DEFAULT_SIZES, SizeModel, size_source_value, size_stored_value
from ..source import evaluator as se
from ..source import syntax as s
from ..target import machine as tm
from ..target.parser import print_config
from ..target.syntax import Config, config_equal, is_location
from ..translate import transl, translate_program
from .generate import GenConfig, gen_expr

# ---------------------------------------------------------------- commutation


@dataclass
class CommutationFailure:
    config: Config
    first: tm.Redex
    second: tm.Redex
    left: Config  # result of ``first``
    right: Config  # result of ``second``

    def describe(self) -> str:
        return (f"{self.first.rule}@{self.first.path} vs {self.second.rule}@{self.second.path} "
                f"from {print_config(self.config)}:\n  left  {print_config(self.left)}\n"
                f"  right {print_config(self.right)}")


@dataclass
class CommutationReport:
    pairs_checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _successors(c: Config, model: SizeModel) -> list[Config]:
    # zero or one step: a redex may be consumed by the other one
    out = [c]
    for r in tm.applicable_redexes(c, model):
        out.append(tm.apply_rule(c, r, model))
    return out


def check_commutation(c: Config, pairs_budget: int = 1000,
                      model: SizeModel = DEFAULT_SIZES) -> CommutationReport:
    """Close the square for each pair of distinct applicable redexes.

    The residual of a redex after another step is found by search: the
    square closes when some successor (in at most one step) of each side
    coincides up to ``config_equal``.
    """
    report = CommutationReport()
    rs = tm.applicable_redexes(c, model)
    results = [tm.apply_rule(c, r, model) for r in rs]
    for i in range(len(rs)):
        for j in range(i + 1, len(rs)):
            if report.pairs_checked >= pairs_budget:
                return report
            report.pairs_checked += 1
            left, right = results[i], results[j]
            lefts = _successors(left, model)
            rights = _successors(right, model)
            if not any(config_equal(a, b) for a in lefts for b in rights):
                report.failures.append(CommutationFailure(c, rs[i], rs[j], left, right))
    return report


# ---------------------------------------------------------------- sizes

def check_size_hypothesis(v: s.Expr, model: SizeModel = DEFAULT_SIZES) -> bool:
    """The stored value allocated for ``[v]`` has the size of ``v``."""
    if not s.is_value(v) or isinstance(v, s.Var):
        raise ValueError("expected a non-variable value")
    expected = size_source_value(v, model)
    c = tm.admin_normalize(Config({}, transl(v)), model)
    root = c.expr
    if not (hasattr(root, "name") and is_location(root.name)):
        # literals stay immediate; they carry no size on either side
        return expected is None and root == transl(v)
    return size_stored_value(c.heap[root.name], model) == expected


# ---------------------------------------------------------------- reachable states

def source_reachable(e: s.Expr, limit: int = 50, model: SizeModel = DEFAULT_SIZES) -> list[s.Expr]:
    """``e`` and its successors along the deterministic reduction, at most ``limit`` terms."""
    out = [e]
    for _, t in islice(se.iter_source(e, model), limit - 1):
        out.append(t)
    return out


def random_walk(c: Config, rng: random.Random, max_steps: int,
                model: SizeModel = DEFAULT_SIZES) -> Iterator[Config]:
    """Follow uniformly chosen applicable redexes, yielding every configuration visited."""
    yield c
    for _ in range(max_steps):
        rs = tm.applicable_redexes(c, model)
        if not rs:
            return
        c = tm.apply_rule(c, rng.choice(rs), model)
        yield c


def reachable_configs(n: int, seed: int = 0, max_heap: int = 6, walk: int = 40,
                      prims: Optional[bool] = None, min_redexes: int = 0,
                      model: SizeModel = DEFAULT_SIZES) -> list[Config]:
    """``n`` configurations reachable from translated generated programs."""
    rng = random.Random(seed)
    out: list[Config] = []
    case = 0
    while len(out) < n:
        case += 1
        use_prims = rng.random() < 0.5 if prims is None else prims
        cfg = GenConfig(seed=seed * 100_003 + case, max_depth=3, prims_enabled=use_prims)
        start = translate_program(gen_expr(cfg, model))
        seen = [c for c in random_walk(start, rng, rng.randint(0, walk), model)
                if len(c.heap) <= max_heap]
        if min_redexes:
            seen = [c for c in seen if len(tm.applicable_redexes(c, model)) >= min_redexes]
        if seen:
            out.append(rng.choice(seen))
    return out
