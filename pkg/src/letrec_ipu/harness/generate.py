"""Random closed, well-formed source programs.

Generation is guided by *kinds*, a crude shape discipline (functions from
one kind to another, records with typed fields, and under the prims flag
naturals and booleans).  Kinds keep most programs from faulting by
accident, so the faults that do happen are mostly the injected ones.

Forward references inside a binding only target definitions whose
right-hand side is an abstraction or a record literal; their sizes are
then filled in by :func:`infer_size_annotations`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from ..sizing import DEFAULT_SIZES, SizeModel, infer_size_annotations
from ..source import syntax as s

FIELDS = ("A", "B", "C", "D")

# kinds: ("fun", arg, res) | ("rec", ((field, kind), ...)) | ("nat",) | ("bool",)
UNIT = ("rec", ())
NAT, BOOL = ("nat",), ("bool",)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_depth: int = 4
    max_binding_len: int = 3
    known_size_probability: float = 0.5
    prims_enabled: bool = False
    fault_rate: float = 0.2
    recursion_weight: float = 0.3


@dataclass(frozen=True)
class GeneratedCase:
    expr: s.Expr
    injected: Optional[str]  # name of the injected fault, if any
    seed: int


def kind_size(k, model: SizeModel = DEFAULT_SIZES) -> Optional[int]:
    if k[0] == "fun":
        return model.function_size
    if k[0] == "rec":
        return model.record(len(k[1]))
    return None


class Generator:
    def __init__(self, cfg: GenConfig, model: SizeModel = DEFAULT_SIZES):
        self.cfg = cfg
        self.model = model
        self.rng = random.Random(cfg.seed)
        self.counter = 0

    # ---------------------------------------------------------- helpers

    def fresh(self, stem: str = "x") -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    def base_kinds(self):
        return [UNIT, NAT, BOOL] if self.cfg.prims_enabled else [UNIT]

    def kind(self, depth: int):
        r = self.rng.random()
        if depth <= 0 or r < 0.35:
            return self.rng.choice(self.base_kinds())
        if r < 0.7:
            return ("fun", self.kind(depth - 1), self.kind(depth - 1))
        n = self.rng.randint(1, 2)
        names = sorted(self.rng.sample(FIELDS, n))
        return ("rec", tuple((f, self.kind(depth - 1)) for f in names))

    def pick_var(self, env: dict, k, recursive: set):
        cands = [x for x, kk in env.items() if kk == k]
        if not cands:
            return None
        plain = [x for x in cands if x not in recursive]
        if plain and (self.rng.random() > self.cfg.recursion_weight or len(plain) == len(cands)):
            return self.rng.choice(plain)
        return self.rng.choice(cands)

    # ---------------------------------------------------------- expressions

    def expr(self, k, env: dict, depth: int, recursive: frozenset = frozenset()) -> s.Expr:
        rng = self.rng
        v = self.pick_var(env, k, recursive)
        if depth <= 0:
            if v is not None and rng.random() < 0.8:
                return s.Var(v)
            return self.intro(k, env, 0, recursive)
        choices = ["intro", "app", "letrec", "select"]
        weights = [3, 2, 2, 1]
        if v is not None:
            choices.append("var")
            weights.append(3)
        if self.cfg.prims_enabled:
            choices += ["if", "loop"]
            weights += [1, 1]
        what = rng.choices(choices, weights)[0]
        if what == "var":
            return s.Var(v)
        if what == "intro":
            return self.intro(k, env, depth, recursive)
        if what == "app":
            a = self.kind(1)
            fn = self.expr(("fun", a, k), env, depth - 1, recursive)
            return s.App(fn, self.expr(a, env, depth - 1, recursive))
        if what == "select":
            f = rng.choice(FIELDS)
            others = [(g, self.kind(0)) for g in FIELDS if g != f and rng.random() < 0.3]
            rk = ("rec", tuple(sorted(others + [(f, k)])))
            return s.Select(self.expr(rk, env, depth - 1, recursive), f)
        if what == "if":
            c = self.expr(BOOL, env, depth - 1, recursive)
            return s.If(c, self.expr(k, env, depth - 1, recursive), self.expr(k, env, depth - 1, recursive))
        if what == "loop":
            return self.countdown(k, env, depth, recursive)
        return self.letrec(k, env, depth, recursive)

    def countdown(self, k, env, depth, recursive) -> s.Expr:
        r"""Terminating mutual recursion through a forward reference:
        ``rec f = \n. if n = 0 then base else g (n - 1), g = \m. f m in f N``."""
        f, g, n, m = self.fresh("f"), self.fresh("g"), self.fresh("n"), self.fresh("m")
        base = self.expr(k, {**env, n: NAT}, depth - 1, recursive)
        step = s.App(s.Var(g), s.Prim("-", (s.Var(n), s.NatLit(1))))
        cond = s.Prim("=", (s.Var(n), s.NatLit(0)))
        size = self.model.function_size
        defs = (
            s.Def(f, size, s.Lam(n, s.If(cond, base, step))),
            s.Def(g, size, s.Lam(m, s.App(s.Var(f), s.Var(m)))),
        )
        return s.Letrec(defs, s.App(s.Var(f), s.NatLit(self.rng.randint(0, 12))))

    def intro(self, k, env, depth, recursive) -> s.Expr:
        rng = self.rng
        if k[0] == "fun":
            x = self.fresh("x")
            return s.Lam(x, self.expr(k[2], {**env, x: k[1]}, depth - 1, recursive))
        if k[0] == "rec":
            fields, defs = [], []
            for f, fk in k[1]:
                v = self.pick_var(env, fk, recursive)
                if v is None or (depth > 0 and rng.random() < 0.3):
                    v = self.fresh("f")
                    defs.append(s.Def(v, None, self.expr(fk, env, depth - 1, recursive)))
                fields.append((f, s.Var(v)))
            rec = s.Record(tuple(fields))
            return s.Letrec(tuple(defs), rec) if defs else rec
        if k == NAT:
            if depth > 0 and rng.random() < 0.4:
                op = rng.choice(["+", "-"])
                return s.Prim(op, (self.expr(NAT, env, depth - 1, recursive), self.expr(NAT, env, depth - 1, recursive)))
            return s.NatLit(rng.randint(0, 5))
        if depth > 0 and rng.random() < 0.5:
            op = rng.choice(["=", ">", "and", "or"])
            ak = BOOL if op in ("and", "or") else NAT
            return s.Prim(op, (self.expr(ak, env, depth - 1, recursive), self.expr(ak, env, depth - 1, recursive)))
        return s.BoolLit(rng.random() < 0.5)

    def letrec(self, k, env, depth, recursive) -> s.Expr:
        rng = self.rng
        n = rng.randint(1, self.cfg.max_binding_len)
        names = [self.fresh("r") for _ in range(n)]
        kinds = [self.kind(1) for _ in range(n)]
        if rng.random() < 0.6:
            kinds[rng.randrange(n)] = k
        manifest = self._manifest(names, kinds, env)
        defs = []
        for i, (x, xk) in enumerate(zip(names, kinds)):
            visible = dict(env)
            visible.update({names[j]: kinds[j] for j in range(i)})
            rec_now = set(recursive)
            for j in range(i, n):
                if names[j] in manifest:
                    visible[names[j]] = kinds[j]
                    rec_now.add(names[j])
            if x in manifest:
                rhs = self._manifest_rhs(xk, visible, depth, frozenset(rec_now))
            else:
                rhs = self.expr(xk, visible, depth - 1, frozenset(rec_now))
            size = None
            ks = kind_size(xk, self.model)
            if ks is not None and rng.random() < self.cfg.known_size_probability:
                size = ks
            defs.append(s.Def(x, size, rhs))
        defs, diags = infer_size_annotations(tuple(defs), self.model)
        assert not diags, diags
        inner = {**env, **dict(zip(names, kinds))}
        return s.Letrec(defs, self.expr(k, inner, depth - 1, recursive))

    def _manifest(self, names, kinds, env) -> set:
        # greatest set of definitions that can be written as a lambda or record literal
        m = {x for x, k in zip(names, kinds) if k[0] in ("fun", "rec")}
        changed = True
        while changed:
            changed = False
            avail = set(env.values()) | {k for x, k in zip(names, kinds) if x in m}
            for x, k in zip(names, kinds):
                if x in m and k[0] == "rec" and not all(fk in avail for _, fk in k[1]):
                    m.discard(x)
                    changed = True
        return m

    def _manifest_rhs(self, k, visible, depth, recursive) -> s.Expr:
        if k[0] == "fun":
            x = self.fresh("x")
            return s.Lam(x, self.expr(k[2], {**visible, x: k[1]}, depth - 1, recursive))
        fields = []
        for f, fk in k[1]:
            cands = [x for x, kk in visible.items() if kk == fk]
            fields.append((f, s.Var(self.rng.choice(cands))))
        return s.Record(tuple(fields))

    # ---------------------------------------------------------- programs

    def program(self):
        k = self.kind(2)
        e = self.expr(k, {}, self.cfg.max_depth)
        injected = None
        if self.rng.random() < self.cfg.fault_rate:
            e, injected = self.inject(e, k)
        return e, injected

    def inject(self, e, k):
        """Wrap ``e`` so that evaluating it must fault once ``e`` has a value."""
        rng = self.rng
        options = ["undefined_deref"]
        if k[0] in ("fun", "rec"):
            options.append("size_mismatch")
        if k[0] == "rec":
            options += ["missing_field", "record_applied"]
        if k[0] == "fun":
            options.append("function_selected")
        if k in (NAT, BOOL):
            options.append("literal_known_size")
        what = rng.choice(options)
        x = self.fresh("bad")
        ident = s.Lam("z", s.Var("z"))
        if what == "size_mismatch":
            wrong = kind_size(k, self.model) + rng.randint(1, 2)
            return s.Letrec((s.Def(x, wrong, e),), s.Var(x)), what
        if what == "literal_known_size":
            return s.Letrec((s.Def(x, rng.randint(1, 3), e),), s.Var(x)), what
        if what == "missing_field":
            present = {f for f, _ in k[1]}
            missing = next(f for f in FIELDS + ("Z",) if f not in present)
            return s.Select(e, missing), what
        if what == "record_applied":
            return s.App(e, ident), what
        if what == "function_selected":
            return s.Select(e, "A"), what
        # a strong forward reference: y is needed before it is defined
        y = self.fresh("fwd")
        defs = (
            s.Def(x, None, s.App(s.Var(y), ident)),
            s.Def(y, self.model.function_size, s.Lam("w", s.Var("w"))),
            s.Def(self.fresh("keep"), None, e),
        )
        return s.Letrec(defs, s.Var(x)), what


def gen_case(cfg: GenConfig, model: SizeModel = DEFAULT_SIZES) -> GeneratedCase:
    g = Generator(cfg, model)
    e, injected = g.program()
    return GeneratedCase(e, injected, cfg.seed)


def gen_expr(cfg: GenConfig, model: SizeModel = DEFAULT_SIZES) -> s.Expr:
    return gen_case(cfg, model).expr


def gen_value(cfg: GenConfig, model: SizeModel = DEFAULT_SIZES) -> s.Expr:
    """A non-variable value: a closed abstraction or a record literal.

    Record fields must be variables, so a non-empty record literal is
    necessarily open; its size does not depend on what the fields name.
    """
    g = Generator(cfg, model)
    if g.rng.random() < 0.5:
        k = ("fun", g.kind(1), g.kind(1))
        return g.intro(k, {}, cfg.max_depth, frozenset())
    n = g.rng.randint(0, len(FIELDS))
    names = sorted(g.rng.sample(FIELDS, n))
    return s.Record(tuple((f, s.Var(g.fresh("y"))) for f in names))


# ---------------------------------------------------------------- target configurations

@dataclass(frozen=True)
class TargetGenConfig:
    seed: int = 0
    max_depth: int = 3
    max_heap: int = 3
    prims_enabled: bool = True
    unbound_probability: float = 0.05


class TargetGenerator:
    """Untyped random configurations, for exercising faults the translation never produces."""

    def __init__(self, cfg: TargetGenConfig):
        from ..target import syntax as t

        self.t = t
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.counter = 0
        self.locs = [f"#{i}" for i in range(self.rng.randint(0, cfg.max_heap))]

    def fresh(self) -> str:
        self.counter += 1
        return f"v{self.counter}"

    def var(self, env):
        rng = self.rng
        pool = list(env) + self.locs
        if not pool or rng.random() < self.cfg.unbound_probability:
            return self.t.Var(f"#{len(self.locs) + 7}")
        return self.t.Var(rng.choice(pool))

    def value(self, env):
        t, rng = self.t, self.rng
        if self.cfg.prims_enabled and rng.random() < 0.3:
            return t.Nat(rng.randint(0, 3)) if rng.random() < 0.6 else t.Bool(rng.random() < 0.5)
        return self.var(env)

    def stored(self, env, depth):
        t, rng = self.t, self.rng
        r = rng.random()
        if r < 0.4:
            x = self.fresh()
            return t.Lam(x, self.expr([*env, x], depth - 1))
        if r < 0.8:
            names = sorted(rng.sample(FIELDS, rng.randint(0, 2)))
            return t.Record(tuple((f, self.value(env)) for f in names))
        return t.alloc_block(rng.randint(1, 3))

    def expr(self, env, depth):
        t, rng = self.t, self.rng
        if depth <= 0:
            return self.value(env) if rng.random() < 0.7 else self.stored(env, 0)
        what = rng.choices(
            ["value", "stored", "app", "select", "let", "update", "bare", "prim", "if"],
            [3, 2, 3, 2, 2, 2, 1, 2 * self.cfg.prims_enabled, 1 * self.cfg.prims_enabled],
        )[0]
        if what == "value":
            return self.value(env)
        if what == "stored":
            return self.stored(env, depth)
        if what == "app":
            return t.App(self.expr(env, depth - 1), self.expr(env, depth - 1))
        if what == "select":
            return t.Select(self.expr(env, depth - 1), rng.choice(FIELDS))
        if what == "let":
            defs, scope = [], list(env)
            for _ in range(rng.randint(0, 2)):
                b = self.fresh() if rng.random() < 0.7 else t.WILDCARD
                defs.append((b, self.expr(scope, depth - 1)))
                if b != t.WILDCARD:
                    scope.append(b)
            return t.Let(tuple(defs), self.expr(scope, depth - 1))
        if what == "update":
            return t.App(t.App(t.UPDATE, self.var(env)), self.expr(env, depth - 1))
        if what == "bare":
            return rng.choice([t.ALLOC, t.UPDATE, t.App(t.ALLOC, self.var(env))])
        if what == "prim":
            op = rng.choice(sorted(s.PRIM_OPS))
            return t.Prim(op, (self.expr(env, depth - 1), self.expr(env, depth - 1)))
        return t.If(self.expr(env, depth - 1), self.expr(env, depth - 1), self.expr(env, depth - 1))

    def config(self):
        heap = {x: self.stored([], self.cfg.max_depth - 1) for x in self.locs}
        return self.t.Config(heap, self.expr([], self.cfg.max_depth))


def gen_target_config(cfg: TargetGenConfig):
    return TargetGenerator(cfg).config()
